#include "tsnn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tsnn/error.hpp"

namespace tsnn {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::chrono::sys_seconds parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n != 3 && n < 6) throw DataError("unparseable timestamp '" + text + "'");
    if (n > 3 && sep != 'T' && sep != ' ') throw DataError("unparseable timestamp '" + text + "'");
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + text + "'");
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
        throw DataError("invalid time of day '" + text + "'");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(std::chrono::sys_seconds ts) {
    using namespace std::chrono;
    auto day_point = floor<days>(ts);
    year_month_day ymd{day_point};
    hh_mm_ss tod{ts - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

DataManifest DataManifest::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest is not valid JSON: ") + e.what());
    }
    DataManifest m;
    try {
        auto period = j.at("steps_per_period").get<long long>();
        if (period < 2) throw DataError("manifest steps_per_period must be >= 2");
        m.steps_per_period = static_cast<std::size_t>(period);
        m.step_interval_minutes = j.value("step_interval_minutes", 0.0);
        m.has_header = j.value("has_header", false);
        if (j.contains("start_timestamp") && !j["start_timestamp"].is_null())
            m.start_timestamp = parse_timestamp(j["start_timestamp"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("manifest field error: ") + e.what());
    }
    return m;
}

DataManifest DataManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string DataManifest::to_json_text() const {
    nlohmann::ordered_json j;
    j["steps_per_period"] = steps_per_period;
    j["step_interval_minutes"] = step_interval_minutes;
    if (start_timestamp) j["start_timestamp"] = format_timestamp(*start_timestamp);
    j["has_header"] = has_header;
    return j.dump(2);
}

RawSeries::RawSeries(RowMatrix values, std::size_t steps_per_period, double step_interval_minutes,
                     std::optional<std::chrono::sys_seconds> start)
    : values_(std::move(values)),
      steps_per_period_(steps_per_period),
      step_interval_minutes_(step_interval_minutes),
      start_(start) {
    if (steps_per_period_ < 2) throw DataError("steps_per_period must be >= 2");
    if (values_.cols() == 0) throw DataError("series has no sensors");
    for (std::size_t r = 0; r < values_.rows(); ++r)
        for (std::size_t c = 0; c < values_.cols(); ++c)
            if (!std::isfinite(values_(r, c)))
                throw DataError("non-finite value at step " + std::to_string(r) + ", sensor " + std::to_string(c));
}

std::vector<double> RawSeries::sensor_column(std::size_t sensor) const {
    if (sensor >= sensors()) throw DataError("sensor " + std::to_string(sensor) + " out of range");
    std::vector<double> out(steps());
    for (std::size_t r = 0; r < steps(); ++r) out[r] = values_(r, sensor);
    return out;
}

RawSeries ingest(const std::filesystem::path& csv_path, const std::filesystem::path& manifest_path) {
    if (!std::filesystem::exists(manifest_path)) throw DataError("manifest not found: " + manifest_path.string());
    return ingest(csv_path, DataManifest::load(manifest_path));
}

RawSeries ingest(const std::filesystem::path& csv_path, const DataManifest& manifest) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("data file not found: " + csv_path.string());

    std::vector<double> flat;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::size_t line_no = 0;
    std::string line;
    bool skip_header = manifest.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (skip_header) {
            skip_header = false;
            continue;
        }
        auto cells = split_csv_line(line);
        if (cols == 0) cols = cells.size();
        if (cells.size() != cols)
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                            " columns, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& cell = cells[c];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            bool ok = ec == std::errc{} && ptr == cell.data() + cell.size() && !cell.empty();
            if (!ok || !std::isfinite(v))
                throw DataError("invalid value '" + cell + "' at line " + std::to_string(line_no) + ", column " +
                                std::to_string(c + 1));
            flat.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw DataError("data file is empty: " + csv_path.string());

    RowMatrix values(rows, cols);
    std::copy(flat.begin(), flat.end(), values.data().begin());
    return RawSeries(std::move(values), manifest.steps_per_period, manifest.step_interval_minutes,
                     manifest.start_timestamp);
}

void SplitSpec::validate() const {
    if (train <= 0.0 || validation < 0.0 || test <= 0.0) throw UsageError("split fractions must be positive");
    if (std::abs(train + validation + test - 1.0) > 1e-9) throw UsageError("split fractions must sum to 1");
}

StepRange split_range(std::size_t steps, const SplitSpec& spec, Split which) {
    spec.validate();
    auto n = static_cast<double>(steps);
    auto train_end = static_cast<std::size_t>(std::floor(spec.train * n));
    auto val_end = static_cast<std::size_t>(std::floor((spec.train + spec.validation) * n));
    val_end = std::clamp(val_end, train_end, steps);
    switch (which) {
        case Split::Train: return {0, train_end};
        case Split::Validation: return {train_end, val_end};
        case Split::Test: return {val_end, steps};
    }
    return {};
}

std::vector<SeriesWindow> make_windows(std::span<const double> column, StepRange range, std::size_t history,
                                       std::size_t horizon, std::size_t steps_per_period) {
    if (history == 0 || horizon == 0) throw UsageError("history and horizon lengths must be positive");
    if (steps_per_period < 2) throw UsageError("steps_per_period must be >= 2");
    if (range.end > column.size() || range.begin > range.end) throw DataError("split range outside series");
    const std::size_t span_len = history + horizon;
    if (range.size() < span_len)
        throw DataError("split of " + std::to_string(range.size()) + " steps is shorter than T+T' = " +
                        std::to_string(span_len));

    std::vector<SeriesWindow> windows;
    windows.reserve(range.size() - span_len + 1);
    for (std::size_t start = range.begin; start + span_len <= range.end; ++start) {
        SeriesWindow w;
        w.x.assign(column.begin() + start, column.begin() + start + history);
        w.y.assign(column.begin() + start + history, column.begin() + start + span_len);
        w.index = start;
        w.periodic_step = start % steps_per_period;
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<SeriesWindow> make_windows(const RawSeries& series, std::size_t sensor, std::size_t history,
                                       std::size_t horizon, const SplitSpec& spec, Split which) {
    auto column = series.sensor_column(sensor);
    return make_windows(column, split_range(series.steps(), spec, which), history, horizon,
                        series.steps_per_period());
}

double near_zero_ratio(std::span<const double> column) {
    if (column.empty()) throw DataError("near-zero ratio of an empty sensor");
    double peak = *std::max_element(column.begin(), column.end());
    double threshold = 0.05 * peak;
    auto hits = std::count_if(column.begin(), column.end(), [&](double v) { return v <= threshold; });
    return static_cast<double>(hits) / static_cast<double>(column.size());
}

NearZeroReport near_zero_ratio(const RawSeries& series) {
    NearZeroReport report;
    report.per_sensor.reserve(series.sensors());
    for (std::size_t s = 0; s < series.sensors(); ++s) report.per_sensor.push_back(near_zero_ratio(series.sensor_column(s)));
    double sum = 0.0;
    for (double r : report.per_sensor) sum += r;
    report.average = sum / static_cast<double>(report.per_sensor.size());
    return report;
}

}  // namespace tsnn
