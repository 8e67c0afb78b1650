#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "../reference/reference_tsnn.hpp"
#include "test_util.hpp"
#include "tsnn/bank.hpp"
#include "tsnn/error.hpp"
#include "tsnn/eval.hpp"

namespace fs = std::filesystem;
using namespace tsnn;

namespace {

ModelConfig small_config(std::size_t period, std::size_t tolerance, std::size_t layers, std::size_t history,
                         std::size_t horizon) {
    ModelConfig cfg;
    cfg.steps_per_period = period;
    cfg.tolerance = tolerance;
    cfg.layers = layers;
    cfg.history = history;
    cfg.horizon = horizon;
    return cfg;
}

fs::path temp_file(const std::string& stem) {
    return fs::temp_directory_path() / (stem + std::to_string(std::random_device{}()) + ".bank");
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
}

// Toy instance: t = 2, T = T' = 2, hand-chosen integers.
std::vector<SeriesWindow> toy_windows() {
    return {test::window({1, 2}, {3, 4}, 0, 2), test::window({2, 5}, {1, 0}, 1, 2),
            test::window({4, 1}, {2, 6}, 2, 2)};
}

}  // namespace

TEST_CASE("circular distance wraps around the period") {
    CHECK(circular_distance(287, 0, 288) == 1);
    CHECK(circular_distance(0, 287, 288) == 1);
    CHECK(circular_distance(10, 4, 288) == 6);
    CHECK(circular_distance(0, 144, 288) == 144);
}

TEST_CASE("layer-1 candidate set with tolerance 3 around p = 0") {
    std::vector<std::size_t> steps(288);
    for (std::size_t i = 0; i < 288; ++i) steps[i] = i;
    auto rows = candidate_set(steps, 0, std::nullopt, 1, 3, 288);
    std::set<std::size_t> got;
    for (auto r : rows) got.insert(steps[r]);
    CHECK(got == std::set<std::size_t>{285, 286, 287, 0, 1, 2, 3});
}

TEST_CASE("candidate set self exclusion and tolerance 0") {
    std::vector<std::size_t> steps{72, 72, 73, 71, 72};
    CHECK(candidate_set(steps, 72, std::nullopt, 1, 0, 288) == std::vector<std::size_t>{0, 1, 4});
    CHECK(candidate_set(steps, 72, 1, 1, 0, 288) == std::vector<std::size_t>{0, 4});
    CHECK(candidate_set(steps, 72, 1, 2, 0, 288).size() == steps.size() - 1);
    CHECK(candidate_set(steps, 72, std::nullopt, 2, 0, 288).size() == steps.size());
    CHECK_THROWS_AS(candidate_set(steps, 72, std::nullopt, 0, 0, 288), UsageError);
}

TEST_CASE("mean_of") {
    CHECK(mean_of(std::vector<double>{1, 2, 3}) == 2.0);
    CHECK(mean_of(std::vector<double>(12, 0.0)) == 0.0);
    CHECK_THROWS_AS(mean_of(std::vector<double>{}), ComputationError);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        auto v = test::random_vector(rng, 12, -1000, 1000);
        // Kahan-compensated oracle
        double sum = 0, comp = 0;
        for (double e : v) {
            double y = e - comp;
            double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        CHECK(std::abs(mean_of(v) - sum / 12.0) < 1e-12);
    }
}

TEST_CASE("two identical training windows decouple to exact zero at layer 2") {
    std::vector<SeriesWindow> w{test::window({1, 2, 3}, {4, 5}, 0, 4), test::window({1, 2, 3}, {4, 5}, 4, 4)};
    auto bank = build_bank(w, small_config(4, 0, 2, 3, 2));
    for (std::size_t j = 0; j < 2; ++j) {
        for (double v : bank.layer(1).x.row(j)) CHECK(v == 0.0);
        for (double v : bank.layer(1).y.row(j)) CHECK(v == 0.0);
    }
}

TEST_CASE("toy bank matches the reference transcription") {
    auto w = toy_windows();
    auto cfg = small_config(2, 1, 3, 2, 2);
    auto bank = build_bank(w, cfg);

    reference::Params prm{cfg.kernel.gamma, cfg.kernel.beta, 1, 2, 3};
    std::vector<reference::Vec> xs, ys;
    std::vector<int> steps;
    for (const auto& win : w) {
        xs.push_back(win.x);
        ys.push_back(win.y);
        steps.push_back(static_cast<int>(win.periodic_step));
    }
    auto ref = reference::build(xs, ys, steps, prm);
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 2; ++i) {
                CHECK(bank.layer(l).x(j, i) == doctest::Approx(ref.xs[l][j][i]).epsilon(1e-12));
                CHECK(bank.layer(l).y(j, i) == doctest::Approx(ref.ys[l][j][i]).epsilon(1e-12));
            }
    auto e = bank.entry(1);
    CHECK(e.entry_id == 1);
    CHECK(e.periodic_step == 1);
    CHECK(e.x.size() == 3);
    CHECK(e.x[0][1] == 5.0);
}

TEST_CASE("first layer stores the raw windows") {
    std::mt19937_64 rng(2);
    auto w = test::random_windows(rng, 30, 5, 3, 6);
    auto bank = build_bank(w, small_config(6, 1, 3, 5, 3));
    for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(std::vector<double>(bank.layer(0).x.row(j).begin(), bank.layer(0).x.row(j).end()) == w[j].x);
        CHECK(bank.entry_id(j) == w[j].index);
    }
    CHECK(bank.residual_bytes() == 3 * 30 * (5 + 3) * sizeof(double));
}

TEST_CASE("empty layer-1 candidate set aborts construction naming the periodic step") {
    // Period 10, tolerance 0: step 3 appears once.
    std::vector<SeriesWindow> w{test::window({1}, {1}, 0, 10), test::window({2}, {2}, 10, 10),
                                test::window({3}, {3}, 3, 10)};
    for (std::size_t layers : {1, 2}) {
        try {
            build_bank(w, small_config(10, 0, layers, 1, 1));
            FAIL("expected failure");
        } catch (const ComputationError& e) {
            CHECK(std::string(e.what()).find("periodic step 3") != std::string::npos);
        }
    }
    CHECK_THROWS_AS(build_bank(std::vector<SeriesWindow>{w[0]}, small_config(10, 0, 1, 1, 1)), DataError);
}

TEST_CASE("bank construction is deterministic") {
    std::mt19937_64 rng(3);
    auto w = test::random_windows(rng, 80, 6, 4, 8);
    auto cfg = small_config(8, 1, 4, 6, 4);
    CHECK(build_bank(w, cfg) == build_bank(w, cfg));
}

TEST_CASE("adding a pattern to every window of one periodic step leaves deeper residuals unchanged") {
    std::mt19937_64 rng(4);
    const std::size_t period = 6;
    auto w = test::random_windows(rng, 120, 6, 4, period);
    auto cfg = small_config(period, 0, 4, 6, 4);
    auto base = build_bank(w, cfg);

    auto vx = test::random_vector(rng, 6, -30, 30);
    auto vy = test::random_vector(rng, 4, -30, 30);
    auto shifted = w;
    for (auto& win : shifted)
        if (win.periodic_step == 2) {
            for (std::size_t i = 0; i < 6; ++i) win.x[i] += vx[i];
            for (std::size_t i = 0; i < 4; ++i) win.y[i] += vy[i];
        }
    auto moved = build_bank(shifted, cfg);
    for (std::size_t l = 1; l < 4; ++l)
        for (std::size_t j = 0; j < w.size(); ++j) {
            for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(base.layer(l).x(j, i) - moved.layer(l).x(j, i)) < 1e-9);
            for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(base.layer(l).y(j, i) - moved.layer(l).y(j, i)) < 1e-9);
        }
}

TEST_CASE("bank save/load round trip is bit exact") {
    std::mt19937_64 rng(5);
    auto w = test::random_windows(rng, 40, 4, 3, 5);
    auto cfg = small_config(5, 1, 3, 4, 3);
    cfg.kernel.gamma = 7.25;
    cfg.kernel.scaling = Scaling::Sigmoid;
    auto bank = build_bank(w, cfg, 17);
    auto path = temp_file("roundtrip");
    save_bank(bank, path);
    CHECK(fs::file_size(path) == serialized_bank_size(40, 3, 4, 3));
    auto back = load_bank(path);
    CHECK(back == bank);
    CHECK(back.sensor_id() == 17);
    CHECK(back.config().kernel.scaling == Scaling::Sigmoid);
    fs::remove(path);

    auto toy = build_bank(toy_windows(), small_config(2, 1, 2, 2, 2));
    save_bank(toy, path);
    CHECK(load_bank(path) == toy);
    fs::remove(path);
}

TEST_CASE("serialized size follows the record layout") {
    // 85-byte header, 12 bytes of ids per entry, 8 bytes per stored value, 4-byte checksum.
    CHECK(serialized_bank_size(10690, 10, 12, 12) == 85 + 10690 * (12 + 10 * 24 * 8) + 4);
}

TEST_CASE("corrupted bank files are rejected") {
    auto bank = build_bank(toy_windows(), small_config(2, 1, 2, 2, 2));
    auto path = temp_file("corrupt");
    save_bank(bank, path);
    const auto good = read_bytes(path);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    write_bytes(path, bad_magic);
    CHECK_THROWS_AS(load_bank(path), DataError);

    auto bad_version = good;
    bad_version[8] = 9;
    write_bytes(path, bad_version);
    CHECK_THROWS_WITH_AS(load_bank(path), doctest::Contains("version"), DataError);

    auto flipped = good;
    flipped[good.size() - 20] ^= 0x40;
    write_bytes(path, flipped);
    CHECK_THROWS_WITH_AS(load_bank(path), doctest::Contains("checksum"), DataError);

    auto truncated = good;
    truncated.resize(good.size() - 7);
    write_bytes(path, truncated);
    CHECK_THROWS_WITH_AS(load_bank(path), doctest::Contains("truncated"), DataError);

    write_bytes(path, std::vector<char>(good.begin(), good.begin() + 10));
    CHECK_THROWS_AS(load_bank(path), DataError);

    fs::remove(path);
    CHECK_THROWS_AS(load_bank(path), DataError);
}

TEST_CASE("layer-2 inputs are uncorrelated with the per-step average pattern") {
    SyntheticSpec spec;
    spec.steps = 48 * 42;
    spec.noise_fraction = 0.05;
    auto series = synthetic_series(spec);
    auto train = make_windows(series, 0, 12, 12, SplitSpec{}, Split::Train);
    auto bank = build_bank(train, small_config(48, 3, 2, 12, 12));

    // Average raw history per periodic step.
    std::vector<std::vector<double>> pattern(48, std::vector<double>(12, 0.0));
    std::vector<double> count(48, 0.0);
    for (const auto& w : train) {
        for (std::size_t i = 0; i < 12; ++i) pattern[w.periodic_step][i] += w.x[i];
        count[w.periodic_step] += 1;
    }
    std::vector<double> a, b;
    for (std::size_t j = 0; j < train.size(); ++j)
        for (std::size_t i = 0; i < 12; ++i) {
            a.push_back(bank.layer(1).x(j, i));
            b.push_back(pattern[train[j].periodic_step][i] / count[train[j].periodic_step]);
        }
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    const double corr = sab / std::sqrt(saa * sbb);
    CHECK(std::abs(corr) < 0.05);
}
