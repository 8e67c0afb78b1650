#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tsnn/bank.hpp"
#include "tsnn/predictor.hpp"

namespace tsnn {

struct EntryContribution {
    std::size_t entry_id = 0;
    std::size_t source_index = 0;  // absolute first step of the entry's window
    std::size_t periodic_step = 0;
    double value = 0.0;
};

struct DayContribution {
    std::size_t day = 0;  // floor(source_index / steps_per_period)
    double value = 0.0;
};

/// Monday first.
using WeekdayContributions = std::array<double, 7>;
inline constexpr std::array<const char*, 7> kWeekdayNames = {"Monday", "Tuesday", "Wednesday", "Thursday",
                                                              "Friday", "Saturday", "Sunday"};

struct ContributionReport {
    std::size_t query_id = 0;
    std::vector<EntryContribution> entries;  // one per bank row, in bank order
    std::vector<DayContribution> by_day;
    std::optional<WeekdayContributions> by_weekday;

    double total() const;
};

/// Contribution(b_j) = sum over layers of raw score * mean(layer prediction).
/// Rows outside a layer's candidate set get nothing from that layer.
ContributionReport contributions(const PredictionTrace& trace, const MemoryBank& bank, std::size_t query_id = 0);
ContributionReport contributions(const Prediction& prediction, const MemoryBank& bank, std::size_t query_id = 0);

/// Element-wise sum of reports over the same bank, e.g. every query of a day.
ContributionReport accumulate(std::span<const ContributionReport> reports);

std::vector<DayContribution> aggregate_by_source_day(const ContributionReport& report, std::size_t steps_per_period);

/// Weekday of each entry's source day, counted from the series start.
WeekdayContributions aggregate_by_day_of_week(const ContributionReport& report, std::size_t steps_per_period,
                                              double step_interval_minutes,
                                              const std::optional<std::chrono::sys_seconds>& start);

std::size_t argmax_weekday(const WeekdayContributions& w);

std::string report_to_json(const ContributionReport& report, int indent = 2);
std::string report_to_csv(const ContributionReport& report);

}  // namespace tsnn
