#pragma once

// Straight-line reference of the layered memory-bank forecaster, written
// against the formulas only. Shares no code with the library: plain nested
// vectors, no spans, no matrix type.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <vector>

namespace reference {

using Vec = std::vector<double>;

struct Params {
    double gamma = 10.0;
    double beta = 1.5;
    int tolerance = 3;
    int period = 288;
    int layers = 3;
};

inline double norm_of_difference(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

inline double average(const Vec& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

inline Vec shifted(const Vec& v, double c) {
    Vec out = v;
    for (double& e : out) e -= c;
    return out;
}

inline int periodic_gap(int a, int b, int period) {
    int d = std::abs(a - b) % period;
    return std::min(d, period - d);
}

// Normalized similarity scores of `query` against `others`.
inline Vec similarity(const Vec& query, const std::vector<Vec>& others, double gamma, double beta) {
    Vec d;
    for (const auto& o : others) d.push_back(norm_of_difference(query, o));
    double lo = *std::min_element(d.begin(), d.end());
    double hi = *std::max_element(d.begin(), d.end());
    Vec alpha;
    for (double di : d) {
        double dhat = hi > lo ? (di - lo) / (hi - lo) : 0.0;
        alpha.push_back(std::exp(-std::pow(gamma * dhat, beta)));
    }
    double total = 0.0;
    for (double a : alpha) total += a;
    for (double& a : alpha) a /= total;
    return alpha;
}

struct Bank {
    // xs[l][j], ys[l][j] for l = 0..layers-1
    std::vector<std::vector<Vec>> xs;
    std::vector<std::vector<Vec>> ys;
    std::vector<int> steps;
};

inline Bank build(const std::vector<Vec>& x, const std::vector<Vec>& y, const std::vector<int>& steps,
                  const Params& prm) {
    Bank b;
    b.steps = steps;
    b.xs.push_back(x);
    b.ys.push_back(y);
    const std::size_t n = x.size();
    for (int l = 1; l < prm.layers; ++l) {
        const auto& X = b.xs.back();
        const auto& Y = b.ys.back();
        std::vector<Vec> nx(n), ny(n);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> ks;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == j) continue;
                if (l == 1 && periodic_gap(steps[k], steps[j], prm.period) > prm.tolerance) continue;
                ks.push_back(k);
            }
            if (l == 1) {
                std::vector<Vec> cand;
                for (auto k : ks) cand.push_back(X[k]);
                Vec a = similarity(X[j], cand, prm.gamma, prm.beta);
                Vec rx = X[j], ry = Y[j];
                for (std::size_t c = 0; c < ks.size(); ++c) {
                    for (std::size_t i = 0; i < rx.size(); ++i) rx[i] -= a[c] * X[ks[c]][i];
                    for (std::size_t i = 0; i < ry.size(); ++i) ry[i] -= a[c] * Y[ks[c]][i];
                }
                nx[j] = rx;
                ny[j] = ry;
            } else {
                double mj = average(X[j]);
                std::vector<Vec> cand;
                for (auto k : ks) cand.push_back(shifted(X[k], average(X[k])));
                Vec a = similarity(shifted(X[j], mj), cand, prm.gamma, prm.beta);
                Vec rx = shifted(X[j], mj), ry = shifted(Y[j], mj);
                for (std::size_t c = 0; c < ks.size(); ++c) {
                    double mk = average(X[ks[c]]);
                    for (std::size_t i = 0; i < rx.size(); ++i) rx[i] -= a[c] * (X[ks[c]][i] - mk);
                    for (std::size_t i = 0; i < ry.size(); ++i) ry[i] -= a[c] * (Y[ks[c]][i] - mk);
                }
                nx[j] = rx;
                ny[j] = ry;
            }
        }
        b.xs.push_back(nx);
        b.ys.push_back(ny);
    }
    return b;
}

struct Forecast {
    Vec total;
    std::vector<Vec> per_layer;
};

inline Forecast forecast(const Bank& b, Vec x, int step, const Params& prm, int layers) {
    const std::size_t n = b.steps.size();
    const std::size_t horizon = b.ys[0][0].size();
    Forecast f;
    f.total.assign(horizon, 0.0);
    for (int l = 0; l < layers; ++l) {
        const auto& X = b.xs[l];
        const auto& Y = b.ys[l];
        std::vector<std::size_t> ks;
        for (std::size_t k = 0; k < n; ++k)
            if (l > 0 || periodic_gap(b.steps[k], step, prm.period) <= prm.tolerance) ks.push_back(k);
        Vec yhat(horizon, 0.0);
        if (l == 0) {
            std::vector<Vec> cand;
            for (auto k : ks) cand.push_back(X[k]);
            Vec a = similarity(x, cand, prm.gamma, prm.beta);
            Vec rx = x;
            for (std::size_t c = 0; c < ks.size(); ++c) {
                for (std::size_t i = 0; i < horizon; ++i) yhat[i] += a[c] * Y[ks[c]][i];
                for (std::size_t i = 0; i < rx.size(); ++i) rx[i] -= a[c] * X[ks[c]][i];
            }
            x = rx;
        } else {
            double m = average(x);
            std::vector<Vec> cand;
            for (auto k : ks) cand.push_back(shifted(X[k], average(X[k])));
            Vec a = similarity(shifted(x, m), cand, prm.gamma, prm.beta);
            Vec rx = shifted(x, m);
            for (std::size_t i = 0; i < horizon; ++i) yhat[i] = m;
            for (std::size_t c = 0; c < ks.size(); ++c) {
                double mk = average(X[ks[c]]);
                for (std::size_t i = 0; i < horizon; ++i) yhat[i] += a[c] * (Y[ks[c]][i] - mk);
                for (std::size_t i = 0; i < rx.size(); ++i) rx[i] -= a[c] * (X[ks[c]][i] - mk);
            }
            x = rx;
        }
        for (std::size_t i = 0; i < horizon; ++i) f.total[i] += yhat[i];
        f.per_layer.push_back(yhat);
    }
    return f;
}

}  // namespace reference
