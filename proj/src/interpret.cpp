#include "tsnn/interpret.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tsnn/error.hpp"

namespace tsnn {

double ContributionReport::total() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.value;
    return sum;
}

ContributionReport contributions(const PredictionTrace& trace, const MemoryBank& bank, std::size_t query_id) {
    if (trace.layers.empty()) throw ComputationError("trace holds no layers; predict with trace capture enabled");
    ContributionReport report;
    report.query_id = query_id;
    report.entries.resize(bank.size());
    for (std::size_t j = 0; j < bank.size(); ++j)
        report.entries[j] = {bank.entry_id(j), bank.entry_id(j), bank.periodic_step(j), 0.0};

    for (const auto& layer : trace.layers) {
        if (layer.raw_scores.size() != layer.candidate_rows.size() || layer.prediction.empty())
            throw ComputationError("trace layer " + std::to_string(layer.layer) + " lacks captured scores");
        const double layer_mean = mean_of(layer.prediction);
        for (std::size_t c = 0; c < layer.candidate_rows.size(); ++c) {
            const std::size_t row = layer.candidate_rows[c];
            if (row >= bank.size()) throw ComputationError("trace refers to a row outside the bank");
            report.entries[row].value += layer.raw_scores[c] * layer_mean;
        }
    }
    return report;
}

ContributionReport contributions(const Prediction& prediction, const MemoryBank& bank, std::size_t query_id) {
    if (!prediction.trace) throw ComputationError("prediction was made without trace capture");
    return contributions(*prediction.trace, bank, query_id);
}

ContributionReport accumulate(std::span<const ContributionReport> reports) {
    if (reports.empty()) throw UsageError("nothing to accumulate");
    ContributionReport out = reports.front();
    out.by_day.clear();
    out.by_weekday.reset();
    for (std::size_t r = 1; r < reports.size(); ++r) {
        if (reports[r].entries.size() != out.entries.size())
            throw ComputationError("cannot accumulate reports over different banks");
        for (std::size_t j = 0; j < out.entries.size(); ++j) out.entries[j].value += reports[r].entries[j].value;
    }
    return out;
}

std::vector<DayContribution> aggregate_by_source_day(const ContributionReport& report, std::size_t steps_per_period) {
    if (steps_per_period == 0) throw UsageError("steps_per_period must be positive");
    std::map<std::size_t, double> days;
    for (const auto& e : report.entries) days[e.source_index / steps_per_period] += e.value;
    std::vector<DayContribution> out;
    out.reserve(days.size());
    for (const auto& [day, value] : days) out.push_back({day, value});
    return out;
}

WeekdayContributions aggregate_by_day_of_week(const ContributionReport& report, std::size_t steps_per_period,
                                              double step_interval_minutes,
                                              const std::optional<std::chrono::sys_seconds>& start) {
    if (!start) throw DataError("day-of-week aggregation needs a start_timestamp in the manifest");
    if (!(step_interval_minutes > 0.0)) throw DataError("day-of-week aggregation needs step_interval_minutes");
    using namespace std::chrono;
    WeekdayContributions out{};
    for (const auto& e : report.entries) {
        const std::size_t day_start_step = (e.source_index / steps_per_period) * steps_per_period;
        const auto offset = duration_cast<seconds>(duration<double, std::ratio<60>>(
            static_cast<double>(day_start_step) * step_interval_minutes));
        const weekday wd{floor<days>(*start + offset)};
        out[wd.iso_encoding() - 1] += e.value;
    }
    return out;
}

std::size_t argmax_weekday(const WeekdayContributions& w) {
    return static_cast<std::size_t>(std::distance(w.begin(), std::max_element(w.begin(), w.end())));
}

std::string report_to_json(const ContributionReport& report, int indent) {
    nlohmann::ordered_json j;
    j["query_id"] = report.query_id;
    auto& entries = j["contributions"] = nlohmann::ordered_json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"entry_id", e.entry_id},
                           {"source_index", e.source_index},
                           {"periodic_step", e.periodic_step},
                           {"value", e.value}});
    auto& days = j["by_day"] = nlohmann::ordered_json::array();
    for (const auto& d : report.by_day) days.push_back({{"day", d.day}, {"value", d.value}});
    auto& weekdays = j["by_weekday"] = nlohmann::ordered_json::array();
    if (report.by_weekday)
        for (std::size_t i = 0; i < 7; ++i)
            weekdays.push_back({{"weekday", kWeekdayNames[i]}, {"value", (*report.by_weekday)[i]}});
    return j.dump(indent);
}

std::string report_to_csv(const ContributionReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "query_id,entry_id,source_index,periodic_step,value\n";
    for (const auto& e : report.entries)
        out << report.query_id << ',' << e.entry_id << ',' << e.source_index << ',' << e.periodic_step << ','
            << e.value << '\n';
    return out.str();
}

}  // namespace tsnn
