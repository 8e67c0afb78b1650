#include "tsnn/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "tsnn/error.hpp"

namespace tsnn {

std::string to_string(Scaling s) {
    switch (s) {
        case Scaling::Exponential: return "exp";
        case Scaling::Complement: return "complement";
        case Scaling::InverseSquare: return "invsq";
        case Scaling::Sigmoid: return "sigmoid";
    }
    return "unknown";
}

Scaling scaling_from_string(const std::string& name) {
    if (name == "exp" || name == "exponential") return Scaling::Exponential;
    if (name == "complement") return Scaling::Complement;
    if (name == "invsq" || name == "inverse-square") return Scaling::InverseSquare;
    if (name == "sigmoid") return Scaling::Sigmoid;
    throw UsageError("unknown scaling '" + name + "' (expected exp, complement, invsq or sigmoid)");
}

void KernelConfig::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("gamma must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw UsageError("beta must be positive");
    if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
    if (!std::isfinite(mu)) throw UsageError("mu must be finite");
    if (!minmax_normalize && scaling != Scaling::Exponential)
        throw UsageError("disabling distance normalization is only defined for exponential scaling");
}

double centered_distance(std::span<const double> a, double a_offset, std::span<const double> b, double b_offset) {
    const double shift = a_offset - b_offset;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = (a[i] - b[i]) - shift;
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

std::vector<double> distances(std::span<const double> x, const RowMatrix& candidates) {
    if (candidates.empty()) throw ComputationError("distance computation against an empty candidate set");
    if (candidates.cols() != x.size())
        throw ComputationError("length mismatch: query has " + std::to_string(x.size()) + " steps, candidates have " +
                               std::to_string(candidates.cols()));
    std::vector<double> d(candidates.rows());
    for (std::size_t j = 0; j < candidates.rows(); ++j) d[j] = centered_distance(x, 0.0, candidates.row(j), 0.0);
    return d;
}

std::vector<double> normalize_distances(std::span<const double> d) {
    if (d.empty()) throw ComputationError("cannot normalize an empty distance set");
    auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double min = *lo;
    const double spread = *hi - min;
    std::vector<double> out(d.size(), 0.0);
    if (spread > 0.0)
        for (std::size_t j = 0; j < d.size(); ++j) out[j] = (d[j] - min) / spread;
    return out;
}

std::vector<double> scale_scores(std::span<const double> d, const KernelConfig& config) {
    const bool unit_domain = config.minmax_normalize &&
                             (config.scaling == Scaling::Exponential || config.scaling == Scaling::Complement);
    std::vector<double> out(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double v = d[j];
        if (unit_domain && !(v >= 0.0 && v <= 1.0))
            throw ComputationError("normalized distance " + std::to_string(v) + " outside [0, 1]");
        if (!unit_domain && !(v >= 0.0)) throw ComputationError("negative distance");
        switch (config.scaling) {
            case Scaling::Exponential:
                // pow overflow yields +inf, which exp maps to 0.
                out[j] = config.minmax_normalize ? std::exp(-std::pow(config.gamma * v, config.beta))
                                                 : std::exp(-config.gamma * std::pow(v, config.beta));
                break;
            case Scaling::Complement: out[j] = 1.0 - v; break;
            case Scaling::InverseSquare: out[j] = 1.0 / (v * v + config.epsilon); break;
            case Scaling::Sigmoid: out[j] = 1.0 / (1.0 + std::exp(v - config.mu)); break;
        }
    }
    return out;
}

std::vector<double> normalize_scores(std::span<const double> raw) {
    if (raw.empty()) throw ComputationError("cannot normalize an empty score set");
    double sum = 0.0;
    for (double a : raw) sum += a;
    if (!(sum > 0.0) || !std::isfinite(sum)) throw ComputationError("similarity scores sum to zero");
    std::vector<double> out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) out[j] = raw[j] / sum;
    return out;
}

ScoreSet scores_from_distances(std::vector<std::size_t> candidates, std::span<const double> d,
                               const KernelConfig& config) {
    if (d.empty()) throw ComputationError("empty candidate set");
    const bool wants_normalized = config.minmax_normalize &&
                                  (config.scaling == Scaling::Exponential || config.scaling == Scaling::Complement);
    ScoreSet s;
    s.candidates = std::move(candidates);
    s.raw = wants_normalized ? scale_scores(normalize_distances(d), config) : scale_scores(d, config);
    s.normalized = normalize_scores(s.raw);
    return s;
}

std::vector<double> nadaraya_watson(std::span<const double> x, const RowMatrix& candidates_x,
                                    const RowMatrix& candidates_y, double sigma) {
    if (candidates_x.empty()) throw ComputationError("Nadaraya-Watson needs at least one candidate");
    if (candidates_x.rows() != candidates_y.rows()) throw ComputationError("candidate x/y count mismatch");
    if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
    if (candidates_x.cols() != x.size()) throw ComputationError("length mismatch in Nadaraya-Watson");

    std::vector<double> numerator(candidates_y.cols(), 0.0);
    double denominator = 0.0;
    for (std::size_t j = 0; j < candidates_x.rows(); ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double diff = x[i] - candidates_x(j, i);
            sq += diff * diff;
        }
        double k = std::exp(-sq / (2.0 * sigma * sigma));
        denominator += k;
        for (std::size_t i = 0; i < numerator.size(); ++i) numerator[i] += k * candidates_y(j, i);
    }
    if (!(denominator > 0.0)) throw ComputationError("all Nadaraya-Watson kernel weights underflowed to zero");
    for (double& v : numerator) v /= denominator;
    return numerator;
}

}  // namespace tsnn
