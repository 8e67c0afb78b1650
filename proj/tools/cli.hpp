#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsnn/bank.hpp"
#include "tsnn/dataset.hpp"

namespace tsnn::cli {

/// Fully resolved settings of one run. Serialized verbatim as the run
/// manifest; `tsnn rerun` reads it back.
struct RunOptions {
    std::string command;

    std::string data;
    std::string manifest;
    std::string out = "out";
    std::string banks;
    std::vector<std::size_t> sensors;  // empty = all

    std::size_t layers = 10;
    double gamma = 10.0;
    double beta = 1.5;
    std::size_t tolerance = 3;
    std::string scaling = "exp";
    double epsilon = 1e-5;
    double mu = 0.5;
    std::size_t history = 12;
    std::size_t horizon = 12;

    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
    std::string target = "test";

    std::string strategy = "standard";
    bool trace = false;
    std::size_t threads = 0;
    std::uint64_t seed = 0;
    bool json = false;

    bool pooled = false;
    double mape_threshold = 0.0;
    std::string baseline = "tsnn";  // evaluate: tsnn | hi

    std::string axis = "layers";
    std::vector<std::string> grid;

    std::vector<std::string> queries;  // explain: indices or a-b ranges
    bool aggregate = false;

    // synth
    std::size_t steps = 2016;
    std::size_t period = 48;
    std::size_t num_sensors = 1;
    double noise = 0.05;

    ModelConfig model_config(std::size_t steps_per_period) const;
    SplitSpec split() const;

    nlohmann::ordered_json to_json() const;
    static RunOptions from_json(const nlohmann::json& j);
};

/// Parses argv and runs the selected subcommand. Returns the process exit
/// code: 0 success, 1 usage, 2 data error, 3 computation error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs already-resolved options (used by `rerun`). Throws tsnn::Error.
void execute(const RunOptions& options, std::ostream& out);

std::vector<std::size_t> parse_index_list(const std::vector<std::string>& items);

}  // namespace tsnn::cli
