#include "tsnn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "tsnn/error.hpp"

namespace tsnn {

void ErrorAccumulator::add(std::span<const double> prediction, std::span<const double> truth) {
    if (prediction.size() != truth.size())
        throw ComputationError("prediction has " + std::to_string(prediction.size()) + " values, truth has " +
                               std::to_string(truth.size()));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double err = truth[i] - prediction[i];
        abs_sum_ += std::abs(err);
        sq_sum_ += err * err;
        ++n_;
        if (std::abs(truth[i]) > threshold_) {
            ape_sum_ += std::abs(err / truth[i]);
            ++n_ape_;
        }
    }
}

void ErrorAccumulator::merge(const ErrorAccumulator& other) {
    abs_sum_ += other.abs_sum_;
    sq_sum_ += other.sq_sum_;
    ape_sum_ += other.ape_sum_;
    n_ += other.n_;
    n_ape_ += other.n_ape_;
}

MetricSet ErrorAccumulator::result() const {
    MetricSet m;
    m.count = n_;
    m.mape_masked = n_ - n_ape_;
    if (n_ == 0) return m;
    m.mae = abs_sum_ / static_cast<double>(n_);
    m.rmse = std::sqrt(sq_sum_ / static_cast<double>(n_));
    if (n_ape_ > 0) m.mape = 100.0 * ape_sum_ / static_cast<double>(n_ape_);
    return m;
}

MetricSet metrics(std::span<const double> prediction, std::span<const double> truth, double zero_mask_threshold) {
    ErrorAccumulator acc(zero_mask_threshold);
    acc.add(prediction, truth);
    return acc.result();
}

MetricSet macro_average(std::span<const MetricSet> per_sensor) {
    MetricSet avg;
    if (per_sensor.empty()) return avg;
    double mape_sum = 0.0;
    std::size_t mape_n = 0;
    for (const auto& m : per_sensor) {
        avg.mae += m.mae;
        avg.rmse += m.rmse;
        avg.count += m.count;
        avg.mape_masked += m.mape_masked;
        if (m.mape) {
            mape_sum += *m.mape;
            ++mape_n;
        }
    }
    avg.mae /= static_cast<double>(per_sensor.size());
    avg.rmse /= static_cast<double>(per_sensor.size());
    if (mape_n > 0) avg.mape = mape_sum / static_cast<double>(mape_n);
    return avg;
}

std::vector<double> historical_inertia(std::span<const double> x, std::size_t horizon) {
    if (horizon > x.size())
        throw UsageError("historical inertia needs T' <= T (T' = " + std::to_string(horizon) +
                         ", T = " + std::to_string(x.size()) + ")");
    return {x.end() - static_cast<std::ptrdiff_t>(horizon), x.end()};
}

namespace {

std::vector<std::size_t> resolve_sensors(const RawSeries& series, const EvaluateOptions& options) {
    if (options.sensors.empty()) {
        std::vector<std::size_t> all(series.sensors());
        for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
        return all;
    }
    for (std::size_t s : options.sensors)
        if (s >= series.sensors())
            throw UsageError("sensor " + std::to_string(s) + " out of range (series has " +
                             std::to_string(series.sensors()) + ")");
    return options.sensors;
}

Evaluation summarize(std::vector<SensorMetrics> per_sensor, const std::vector<ErrorAccumulator>& accs, bool pooled,
                     double threshold) {
    Evaluation e;
    e.per_sensor = std::move(per_sensor);
    if (pooled) {
        ErrorAccumulator total(threshold);
        for (const auto& a : accs) total.merge(a);
        e.average = total.result();
    } else {
        std::vector<MetricSet> ms;
        for (const auto& s : e.per_sensor) ms.push_back(s.metrics);
        e.average = macro_average(ms);
    }
    return e;
}

}  // namespace

std::vector<Evaluation> evaluate_depths(const RawSeries& series, const ModelConfig& config,
                                        const EvaluateOptions& options, std::span<const std::size_t> depths) {
    config.validate();
    if (depths.empty()) throw UsageError("no evaluation depths requested");
    for (std::size_t d : depths)
        if (d < 1 || d > config.layers) throw UsageError("evaluation depth " + std::to_string(d) + " out of range");
    if (series.steps_per_period() != config.steps_per_period)
        throw UsageError("config steps_per_period does not match the dataset manifest");

    const auto sensors = resolve_sensors(series, options);
    const std::size_t max_depth = *std::max_element(depths.begin(), depths.end());

    // [depth][sensor]
    std::vector<std::vector<SensorMetrics>> per_sensor(depths.size());
    std::vector<std::vector<ErrorAccumulator>> accs(depths.size());

    for (std::size_t s : sensors) {
        auto train = make_windows(series, s, config.history, config.horizon, options.split, Split::Train);
        auto target = make_windows(series, s, config.history, config.horizon, options.split, options.target);

        BatchResult result;
        if (options.strategy == Strategy::Standard) {
            auto cfg = config;
            cfg.layers = max_depth;
            auto bank = build_bank(train, cfg, s);
            result = predict_batch(bank, target, {max_depth, Strategy::Standard, false});
        } else {
            result = predict_batch_memory_efficient(train, target, config, max_depth);
        }

        for (std::size_t d = 0; d < depths.size(); ++d) {
            auto pred = result.cumulative(depths[d]);
            ErrorAccumulator acc(options.mape_threshold);
            for (std::size_t q = 0; q < target.size(); ++q) acc.add(pred.row(q), target[q].y);
            per_sensor[d].push_back({s, acc.result()});
            accs[d].push_back(acc);
        }
    }

    std::vector<Evaluation> out;
    for (std::size_t d = 0; d < depths.size(); ++d)
        out.push_back(summarize(std::move(per_sensor[d]), accs[d], options.pooled, options.mape_threshold));
    return out;
}

Evaluation evaluate(const RawSeries& series, const ModelConfig& config, const EvaluateOptions& options) {
    const std::size_t depth = config.layers;
    return evaluate_depths(series, config, options, std::span(&depth, 1)).front();
}

Evaluation evaluate_historical_inertia(const RawSeries& series, std::size_t history, std::size_t horizon,
                                       const EvaluateOptions& options) {
    std::vector<SensorMetrics> per_sensor;
    std::vector<ErrorAccumulator> accs;
    for (std::size_t s : resolve_sensors(series, options)) {
        auto target = make_windows(series, s, history, horizon, options.split, options.target);
        ErrorAccumulator acc(options.mape_threshold);
        for (const auto& w : target) acc.add(historical_inertia(w.x, horizon), w.y);
        per_sensor.push_back({s, acc.result()});
        accs.push_back(acc);
    }
    return summarize(std::move(per_sensor), accs, options.pooled, options.mape_threshold);
}

std::vector<MetricSet> training_metrics_by_depth(const MemoryBank& bank, std::size_t depth) {
    if (depth < 1 || depth > bank.num_layers()) throw UsageError("depth out of range");
    std::vector<ErrorAccumulator> accs(depth);
    const auto& raw = bank.layer(0);
    for (std::size_t j = 0; j < bank.size(); ++j) {
        auto p = predict(bank, raw.x.row(j), bank.periodic_step(j), depth, true, j);
        std::vector<double> running(bank.config().horizon, 0.0);
        for (std::size_t l = 0; l < depth; ++l) {
            const auto& lp = p.trace->layers[l].prediction;
            for (std::size_t i = 0; i < running.size(); ++i) running[i] += lp[i];
            accs[l].add(running, raw.y.row(j));
        }
    }
    std::vector<MetricSet> out;
    for (const auto& a : accs) out.push_back(a.result());
    return out;
}

std::string to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Layers: return "layers";
        case SweepAxis::Gamma: return "gamma";
        case SweepAxis::Beta: return "beta";
        case SweepAxis::Tolerance: return "tolerance";
        case SweepAxis::Scaling: return "scaling";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& name) {
    for (auto a : {SweepAxis::Layers, SweepAxis::Gamma, SweepAxis::Beta, SweepAxis::Tolerance, SweepAxis::Scaling})
        if (to_string(a) == name) return a;
    throw UsageError("unknown sweep axis '" + name + "'");
}

SweepResult run_sweep(const RawSeries& series, const ModelConfig& config, SweepAxis axis, std::span<const double> grid,
                      const EvaluateOptions& options) {
    if (grid.empty()) throw UsageError("sweep grid is empty");
    SweepResult result;
    result.axis = axis;

    if (axis == SweepAxis::Layers) {
        std::vector<std::size_t> depths;
        for (double v : grid) {
            if (v < 1 || v != std::floor(v)) throw UsageError("layer counts must be positive integers");
            depths.push_back(static_cast<std::size_t>(v));
        }
        auto cfg = config;
        cfg.layers = *std::max_element(depths.begin(), depths.end());
        auto evals = evaluate_depths(series, cfg, options, depths);
        for (std::size_t i = 0; i < grid.size(); ++i) result.points.push_back({grid[i], std::move(evals[i])});
        return result;
    }

    for (double v : grid) {
        auto cfg = config;
        switch (axis) {
            case SweepAxis::Gamma: cfg.kernel.gamma = v; break;
            case SweepAxis::Beta: cfg.kernel.beta = v; break;
            case SweepAxis::Tolerance:
                if (v < 0 || v != std::floor(v)) throw UsageError("tolerance values must be non-negative integers");
                cfg.tolerance = static_cast<std::size_t>(v);
                break;
            case SweepAxis::Scaling:
                if (v < 0 || v > 3 || v != std::floor(v)) throw UsageError("scaling ids are 0..3");
                cfg.kernel.scaling = static_cast<Scaling>(static_cast<int>(v));
                break;
            case SweepAxis::Layers: break;
        }
        result.points.push_back({v, evaluate(series, cfg, options)});
    }
    return result;
}

namespace {

std::string value_label(SweepAxis axis, double v) {
    if (axis == SweepAxis::Scaling) return to_string(static_cast<Scaling>(static_cast<int>(v)));
    std::ostringstream out;
    out << v;
    return out.str();
}

void write_metric_fields(std::ostream& out, const MetricSet& m) {
    out << m.mae << ',' << m.rmse << ',';
    if (m.mape) out << *m.mape;
    out << ',' << m.count << ',' << m.mape_masked;
}

}  // namespace

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << to_string(axis) << ",mae,rmse,mape,count,mape_masked\n";
    for (const auto& p : points) {
        out << value_label(axis, p.value) << ',';
        write_metric_fields(out, p.evaluation.average);
        out << '\n';
    }
    return out.str();
}

std::string SweepResult::to_json(int indent) const {
    nlohmann::ordered_json j;
    j["axis"] = to_string(axis);
    auto& pts = j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        nlohmann::ordered_json row;
        row["value"] = value_label(axis, p.value);
        row["mae"] = p.evaluation.average.mae;
        row["rmse"] = p.evaluation.average.rmse;
        row["mape"] = p.evaluation.average.mape ? nlohmann::ordered_json(*p.evaluation.average.mape) : nullptr;
        pts.push_back(std::move(row));
    }
    return j.dump(indent);
}

std::string evaluation_to_csv(const Evaluation& e) {
    std::ostringstream out;
    out.precision(10);
    out << "sensor,mae,rmse,mape,count,mape_masked\n";
    for (const auto& s : e.per_sensor) {
        out << s.sensor << ',';
        write_metric_fields(out, s.metrics);
        out << '\n';
    }
    out << "average,";
    write_metric_fields(out, e.average);
    out << '\n';
    return out.str();
}

}  // namespace tsnn
