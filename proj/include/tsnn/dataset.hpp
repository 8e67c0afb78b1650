#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsnn/matrix.hpp"

namespace tsnn {

/// Sidecar metadata for a CSV export.
struct DataManifest {
    std::size_t steps_per_period = 0;
    double step_interval_minutes = 0.0;
    std::optional<std::chrono::sys_seconds> start_timestamp;
    bool has_header = false;

    static DataManifest load(const std::filesystem::path& path);
    static DataManifest from_json_text(const std::string& text);
    std::string to_json_text() const;
};

/// Immutable multi-sensor series, [time steps x sensors].
class RawSeries {
public:
    RawSeries(RowMatrix values, std::size_t steps_per_period, double step_interval_minutes = 0.0,
              std::optional<std::chrono::sys_seconds> start = std::nullopt);

    std::size_t steps() const noexcept { return values_.rows(); }
    std::size_t sensors() const noexcept { return values_.cols(); }
    std::size_t steps_per_period() const noexcept { return steps_per_period_; }
    double step_interval_minutes() const noexcept { return step_interval_minutes_; }
    const std::optional<std::chrono::sys_seconds>& start_timestamp() const noexcept { return start_; }

    double at(std::size_t step, std::size_t sensor) const { return values_(step, sensor); }
    std::vector<double> sensor_column(std::size_t sensor) const;
    const RowMatrix& values() const noexcept { return values_; }

private:
    RowMatrix values_;
    std::size_t steps_per_period_;
    double step_interval_minutes_;
    std::optional<std::chrono::sys_seconds> start_;
};

/// Loads a CSV (rows = steps, columns = sensors) plus its JSON manifest.
/// Throws DataError on missing files, ragged rows, or non-finite cells (the
/// message names the 1-based row and column).
RawSeries ingest(const std::filesystem::path& csv_path, const std::filesystem::path& manifest_path);
RawSeries ingest(const std::filesystem::path& csv_path, const DataManifest& manifest);

struct SeriesWindow {
    std::vector<double> x;      // steps [index, index + T)
    std::vector<double> y;      // steps [index + T, index + T + T')
    std::size_t index = 0;      // absolute first step of x
    std::size_t periodic_step = 0;
};

enum class Split { Train, Validation, Test };

struct SplitSpec {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;

    void validate() const;
};

/// Half-open step range [begin, end).
struct StepRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
};

/// Chronological boundaries: train ends at floor(train*n), validation at
/// floor((train+validation)*n).
StepRange split_range(std::size_t steps, const SplitSpec& spec, Split which);

/// Stride-1 windows that lie entirely inside the requested split.
std::vector<SeriesWindow> make_windows(const RawSeries& series, std::size_t sensor, std::size_t history,
                                       std::size_t horizon, const SplitSpec& spec, Split which);

/// Same, over a single univariate column and an explicit range.
std::vector<SeriesWindow> make_windows(std::span<const double> column, StepRange range, std::size_t history,
                                       std::size_t horizon, std::size_t steps_per_period);

struct NearZeroReport {
    std::vector<double> per_sensor;
    double average = 0.0;
};

/// Fraction of each sensor's values at or below 5% of that sensor's maximum.
NearZeroReport near_zero_ratio(const RawSeries& series);
double near_zero_ratio(std::span<const double> column);

/// Parses "YYYY-MM-DD[ T]HH:MM[:SS]" (or a bare date) as UTC.
std::chrono::sys_seconds parse_timestamp(const std::string& text);
std::string format_timestamp(std::chrono::sys_seconds ts);

}  // namespace tsnn
