#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsnn/bank.hpp"
#include "tsnn/dataset.hpp"
#include "tsnn/predictor.hpp"

namespace tsnn {

struct MetricSet {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;  // percent; absent when every point is masked
    std::size_t count = 0;
    std::size_t mape_masked = 0;
};

/// Running sums behind MetricSet. Ground-truth points with |y| <= threshold
/// are excluded from MAPE only.
class ErrorAccumulator {
public:
    explicit ErrorAccumulator(double zero_mask_threshold = 0.0) : threshold_(zero_mask_threshold) {}

    void add(std::span<const double> prediction, std::span<const double> truth);
    void merge(const ErrorAccumulator& other);
    MetricSet result() const;

private:
    double threshold_;
    double abs_sum_ = 0.0;
    double sq_sum_ = 0.0;
    double ape_sum_ = 0.0;
    std::size_t n_ = 0;
    std::size_t n_ape_ = 0;
};

MetricSet metrics(std::span<const double> prediction, std::span<const double> truth, double zero_mask_threshold = 0.0);

/// Unweighted mean of per-sensor metrics; MAPE averages only sensors that have one.
MetricSet macro_average(std::span<const MetricSet> per_sensor);

/// Last `horizon` values of the input window, in order.
std::vector<double> historical_inertia(std::span<const double> x, std::size_t horizon);

struct EvaluateOptions {
    Strategy strategy = Strategy::Standard;
    std::vector<std::size_t> sensors;  // empty = every sensor
    SplitSpec split;
    Split target = Split::Test;
    bool pooled = false;               // pool errors across sensors instead of macro-averaging
    double mape_threshold = 0.0;
};

struct SensorMetrics {
    std::size_t sensor = 0;
    MetricSet metrics;
};

struct Evaluation {
    std::vector<SensorMetrics> per_sensor;
    MetricSet average;
};

/// Builds a bank from the training split of each sensor and scores the target
/// split at the configured depth.
Evaluation evaluate(const RawSeries& series, const ModelConfig& config, const EvaluateOptions& options);

/// Same, scored at several depths from one build; depths must not exceed config.layers.
std::vector<Evaluation> evaluate_depths(const RawSeries& series, const ModelConfig& config,
                                        const EvaluateOptions& options, std::span<const std::size_t> depths);

Evaluation evaluate_historical_inertia(const RawSeries& series, std::size_t history, std::size_t horizon,
                                       const EvaluateOptions& options);

/// Leave-one-out error over the bank's own training entries, one MetricSet
/// per depth 1..depth.
std::vector<MetricSet> training_metrics_by_depth(const MemoryBank& bank, std::size_t depth);

enum class SweepAxis { Layers, Gamma, Beta, Tolerance, Scaling };

std::string to_string(SweepAxis axis);
SweepAxis sweep_axis_from_string(const std::string& name);

struct SweepPoint {
    double value = 0.0;  // scaling sweeps store the Scaling id
    Evaluation evaluation;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::Layers;
    std::vector<SweepPoint> points;

    std::string to_csv() const;
    std::string to_json(int indent = 2) const;
};

/// One full evaluation per grid value, all other settings fixed.
SweepResult run_sweep(const RawSeries& series, const ModelConfig& config, SweepAxis axis, std::span<const double> grid,
                      const EvaluateOptions& options);

std::string evaluation_to_csv(const Evaluation& e);

/// Periodic pattern plus Gaussian noise: value = pattern(p(i)) + noise.
struct SyntheticSpec {
    std::size_t steps = 2016;
    std::size_t sensors = 1;
    std::size_t steps_per_period = 48;
    double level = 100.0;
    double amplitude = 50.0;
    double noise_fraction = 0.0;  // noise sigma as a fraction of amplitude
    std::uint64_t seed = 7;
};

RawSeries synthetic_series(const SyntheticSpec& spec);

/// git blob SHA-1 of a file ("blob <size>\0" + content), hex encoded.
std::string git_blob_hash(const std::filesystem::path& path);

}  // namespace tsnn
