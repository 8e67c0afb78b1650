#include <doctest.h>

#include <random>

#include <json.hpp>

#include "test_util.hpp"
#include "tsnn/bank.hpp"
#include "tsnn/error.hpp"
#include "tsnn/interpret.hpp"
#include "tsnn/predictor.hpp"

using namespace tsnn;

namespace {

ModelConfig config(std::size_t period, std::size_t tolerance, std::size_t layers, std::size_t history,
                   std::size_t horizon) {
    ModelConfig cfg;
    cfg.steps_per_period = period;
    cfg.tolerance = tolerance;
    cfg.layers = layers;
    cfg.history = history;
    cfg.horizon = horizon;
    return cfg;
}

}  // namespace

TEST_CASE("a lone matched entry contributes the mean of its target") {
    auto cfg = config(10, 0, 1, 2, 3);
    LayerResiduals layer{RowMatrix(2, 2), RowMatrix(2, 3), {1.5, 0.0}};
    layer.x(0, 0) = 1, layer.x(0, 1) = 2;
    layer.y(0, 0) = 3, layer.y(0, 1) = 6, layer.y(0, 2) = 9;
    MemoryBank bank(cfg, 0, {40, 45}, {0, 5}, {layer});

    auto p = predict(bank, std::vector<double>{0, 0}, 0, 1, true);
    auto report = contributions(p, bank);
    CHECK(report.entries[0].value == doctest::Approx(6.0));
    CHECK(report.entries[0].entry_id == 40);
    // Out of tolerance: never a candidate.
    CHECK(report.entries[1].value == 0.0);
}

TEST_CASE("contributions recomputed by hand from a trace") {
    std::mt19937_64 rng(31);
    auto w = test::random_windows(rng, 48, 4, 3, 8);
    auto bank = build_bank(w, config(8, 1, 3, 4, 3));
    auto p = predict(bank, test::random_vector(rng, 4), 2, 3, true);
    auto report = contributions(p, bank, 9);
    CHECK(report.query_id == 9);
    REQUIRE(report.entries.size() == bank.size());

    std::vector<double> expected(bank.size(), 0.0);
    for (const auto& layer : p.trace->layers) {
        double m = 0;
        for (double v : layer.prediction) m += v;
        m /= static_cast<double>(layer.prediction.size());
        for (std::size_t c = 0; c < layer.candidate_rows.size(); ++c)
            expected[layer.candidate_rows[c]] += layer.raw_scores[c] * m;
    }
    for (std::size_t j = 0; j < bank.size(); ++j) CHECK(std::abs(report.entries[j].value - expected[j]) < 1e-12);

    // Entries outside the tolerance only collect deeper-layer credit.
    auto one_layer = contributions(predict(bank, test::random_vector(rng, 4), 2, 1, true), bank);
    for (std::size_t j = 0; j < bank.size(); ++j)
        if (circular_distance(bank.periodic_step(j), 2, 8) > 1) CHECK(one_layer.entries[j].value == 0.0);
}

TEST_CASE("contributions require a trace") {
    auto bank = build_bank(std::vector<SeriesWindow>{test::window({1}, {1}, 0, 2), test::window({2}, {2}, 2, 2)},
                           config(2, 0, 1, 1, 1));
    Prediction p = predict(bank, std::vector<double>{1}, 0, 1, false);
    CHECK_THROWS_AS(contributions(p, bank), ComputationError);
}

TEST_CASE("day aggregation preserves the total") {
    std::mt19937_64 rng(32);
    auto w = test::random_windows(rng, 60, 4, 3, 12);
    auto bank = build_bank(w, config(12, 2, 2, 4, 3));
    auto report = contributions(predict(bank, test::random_vector(rng, 4), 5, 2, true), bank);
    auto days = aggregate_by_source_day(report, 12);
    CHECK(days.size() == 5);
    double sum = 0;
    for (const auto& d : days) sum += d.value;
    CHECK(std::abs(sum - report.total()) < 1e-12);
    double day1 = 0;
    for (const auto& e : report.entries)
        if (e.source_index / 12 == 1) day1 += e.value;
    CHECK(days[1].day == 1);
    CHECK(std::abs(days[1].value - day1) < 1e-15);

    auto weekdays = aggregate_by_day_of_week(report, 12, 120.0, parse_timestamp("2024-01-01 00:00"));
    double wsum = 0;
    for (double v : weekdays) wsum += v;
    CHECK(std::abs(wsum - report.total()) < 1e-12);
    // 2024-01-01 is a Monday: day 0 of the series lands there.
    CHECK(weekdays[0] == doctest::Approx(days[0].value));
    CHECK(weekdays[4] == doctest::Approx(days[4].value));
    CHECK(weekdays[5] == 0.0);
    CHECK_THROWS_AS(aggregate_by_day_of_week(report, 12, 120.0, std::nullopt), DataError);
}

TEST_CASE("accumulated contributions are additive across queries") {
    std::mt19937_64 rng(33);
    auto w = test::random_windows(rng, 40, 3, 2, 4);
    auto bank = build_bank(w, config(4, 1, 2, 3, 2));
    std::vector<ContributionReport> reports;
    for (int q = 0; q < 3; ++q)
        reports.push_back(contributions(predict(bank, test::random_vector(rng, 3), q, 2, true), bank, q));
    auto sum = accumulate(reports);
    for (std::size_t j = 0; j < bank.size(); ++j)
        CHECK(std::abs(sum.entries[j].value -
                       (reports[0].entries[j].value + reports[1].entries[j].value + reports[2].entries[j].value)) <
              1e-12);
    CHECK_THROWS_AS(accumulate(std::span<const ContributionReport>{}), UsageError);
}

TEST_CASE("argmax weekday and serialized reports") {
    WeekdayContributions w{1, 2, 7, 3, 0, -1, 2};
    CHECK(argmax_weekday(w) == 2);
    CHECK(std::string(kWeekdayNames[2]) == "Wednesday");

    ContributionReport r;
    r.query_id = 3;
    r.entries = {{10, 10, 4, 0.5}, {11, 11, 5, 0.25}};
    r.by_day = {{0, 0.75}};
    auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j["query_id"] == 3);
    CHECK(j["contributions"].size() == 2);
    CHECK(j["contributions"][1]["value"] == 0.25);
    CHECK(report_to_csv(r) == "query_id,entry_id,source_index,periodic_step,value\n3,10,10,4,0.5\n3,11,11,5,0.25\n");
}
