#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tsnn/error.hpp"
#include "tsnn/eval.hpp"
#include "tsnn/interpret.hpp"
#include "tsnn/parallel.hpp"
#include "tsnn/predictor.hpp"

namespace fs = std::filesystem;

namespace tsnn::cli {

ModelConfig RunOptions::model_config(std::size_t steps_per_period) const {
    ModelConfig cfg;
    cfg.kernel.gamma = gamma;
    cfg.kernel.beta = beta;
    cfg.kernel.scaling = scaling_from_string(scaling);
    cfg.kernel.epsilon = epsilon;
    cfg.kernel.mu = mu;
    cfg.layers = layers;
    cfg.tolerance = tolerance;
    cfg.steps_per_period = steps_per_period;
    cfg.history = history;
    cfg.horizon = horizon;
    cfg.validate();
    return cfg;
}

SplitSpec RunOptions::split() const {
    SplitSpec s{train, validation, test};
    s.validate();
    return s;
}

nlohmann::ordered_json RunOptions::to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["data"] = data;
    j["manifest"] = manifest;
    j["out"] = out;
    j["banks"] = banks;
    j["sensors"] = sensors;
    j["config"] = {{"layers", layers},   {"gamma", gamma},     {"beta", beta},       {"tolerance", tolerance},
                   {"scaling", scaling}, {"epsilon", epsilon}, {"mu", mu},           {"history", history},
                   {"horizon", horizon}};
    j["split"] = {{"train", train}, {"validation", validation}, {"test", test}, {"target", target}};
    j["strategy"] = strategy;
    j["trace"] = trace;
    j["threads"] = threads;
    j["seed"] = seed;
    j["json"] = json;
    j["pooled"] = pooled;
    j["mape_threshold"] = mape_threshold;
    j["baseline"] = baseline;
    j["axis"] = axis;
    j["grid"] = grid;
    j["queries"] = queries;
    j["aggregate"] = aggregate;
    j["synthetic"] = {{"steps", steps}, {"period", period}, {"sensors", num_sensors}, {"noise", noise}};
    return j;
}

RunOptions RunOptions::from_json(const nlohmann::json& j) {
    RunOptions o;
    try {
        o.command = j.at("command").get<std::string>();
        o.data = j.at("data").get<std::string>();
        o.manifest = j.at("manifest").get<std::string>();
        o.out = j.at("out").get<std::string>();
        o.banks = j.at("banks").get<std::string>();
        o.sensors = j.at("sensors").get<std::vector<std::size_t>>();
        const auto& c = j.at("config");
        o.layers = c.at("layers").get<std::size_t>();
        o.gamma = c.at("gamma").get<double>();
        o.beta = c.at("beta").get<double>();
        o.tolerance = c.at("tolerance").get<std::size_t>();
        o.scaling = c.at("scaling").get<std::string>();
        o.epsilon = c.at("epsilon").get<double>();
        o.mu = c.at("mu").get<double>();
        o.history = c.at("history").get<std::size_t>();
        o.horizon = c.at("horizon").get<std::size_t>();
        const auto& s = j.at("split");
        o.train = s.at("train").get<double>();
        o.validation = s.at("validation").get<double>();
        o.test = s.at("test").get<double>();
        o.target = s.at("target").get<std::string>();
        o.strategy = j.at("strategy").get<std::string>();
        o.trace = j.at("trace").get<bool>();
        o.threads = j.at("threads").get<std::size_t>();
        o.seed = j.at("seed").get<std::uint64_t>();
        o.json = j.at("json").get<bool>();
        o.pooled = j.at("pooled").get<bool>();
        o.mape_threshold = j.at("mape_threshold").get<double>();
        o.baseline = j.at("baseline").get<std::string>();
        o.axis = j.at("axis").get<std::string>();
        o.grid = j.at("grid").get<std::vector<std::string>>();
        o.queries = j.at("queries").get<std::vector<std::string>>();
        o.aggregate = j.at("aggregate").get<bool>();
        const auto& syn = j.at("synthetic");
        o.steps = syn.at("steps").get<std::size_t>();
        o.period = syn.at("period").get<std::size_t>();
        o.num_sensors = syn.at("sensors").get<std::size_t>();
        o.noise = syn.at("noise").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("run manifest is incomplete: ") + e.what());
    }
    return o;
}

std::vector<std::size_t> parse_index_list(const std::vector<std::string>& items) {
    std::vector<std::size_t> out;
    for (const auto& item : items) {
        try {
            auto dash = item.find('-');
            if (dash == std::string::npos) {
                out.push_back(std::stoull(item));
                continue;
            }
            auto lo = std::stoull(item.substr(0, dash));
            auto hi = std::stoull(item.substr(dash + 1));
            if (hi < lo) throw UsageError("empty range '" + item + "'");
            for (auto i = lo; i <= hi; ++i) out.push_back(i);
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse index '" + item + "'");
        }
    }
    return out;
}

namespace {

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "validation" || name == "val") return Split::Validation;
    if (name == "test") return Split::Test;
    throw UsageError("unknown split '" + name + "'");
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f << content;
}

fs::path bank_path(const fs::path& dir, std::size_t sensor) {
    return dir / ("sensor_" + std::to_string(sensor) + ".bank");
}

struct Dataset {
    RawSeries series;
    DataManifest manifest;
};

Dataset load_dataset(const RunOptions& o) {
    if (o.data.empty()) throw UsageError("--data is required");
    fs::path manifest_path = o.manifest.empty() ? fs::path(o.data).replace_extension(".json") : fs::path(o.manifest);
    auto manifest = DataManifest::load(manifest_path);
    return {ingest(o.data, manifest), manifest};
}

std::vector<std::size_t> resolve_sensors(const RunOptions& o, const RawSeries& series) {
    if (o.sensors.empty()) {
        std::vector<std::size_t> all(series.sensors());
        for (std::size_t s = 0; s < all.size(); ++s) all[s] = s;
        return all;
    }
    for (std::size_t s : o.sensors)
        if (s >= series.sensors())
            throw UsageError("sensor " + std::to_string(s) + " out of range (dataset has " +
                             std::to_string(series.sensors()) + ")");
    return o.sensors;
}

std::string format_double(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

nlohmann::ordered_json metric_json(const MetricSet& m) {
    return {{"mae", m.mae},
            {"rmse", m.rmse},
            {"mape", m.mape ? nlohmann::ordered_json(*m.mape) : nlohmann::ordered_json(nullptr)},
            {"count", m.count},
            {"mape_masked", m.mape_masked}};
}

nlohmann::ordered_json input_hashes(const RunOptions& o) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    if (!o.data.empty()) j["data"] = {{"path", o.data}, {"sha1", git_blob_hash(o.data)}};
    fs::path manifest = o.manifest.empty() ? fs::path(o.data).replace_extension(".json") : fs::path(o.manifest);
    if (!o.data.empty()) j["manifest"] = {{"path", manifest.string()}, {"sha1", git_blob_hash(manifest)}};
    return j;
}

MemoryBank obtain_bank(const RunOptions& o, const RawSeries& series, std::size_t sensor, const ModelConfig& cfg) {
    if (!o.banks.empty()) {
        auto path = bank_path(o.banks, sensor);
        if (!fs::exists(path)) throw DataError("missing bank file " + path.string());
        auto bank = load_bank(path);
        if (bank.config().steps_per_period != series.steps_per_period())
            throw DataError("bank " + path.string() + " was built with a different period");
        return bank;
    }
    auto train = make_windows(series, sensor, cfg.history, cfg.horizon, o.split(), Split::Train);
    return build_bank(train, cfg, sensor);
}

nlohmann::ordered_json trace_json(const PredictionTrace& t, std::size_t query) {
    nlohmann::ordered_json j;
    j["query"] = query;
    j["final_prediction"] = t.final_prediction;
    auto& layers = j["layers"] = nlohmann::ordered_json::array();
    for (const auto& l : t.layers)
        layers.push_back({{"layer", l.layer},
                          {"input_mean", l.input_mean},
                          {"residual_input", l.residual_input},
                          {"prediction", l.prediction},
                          {"candidate_ids", l.candidate_ids},
                          {"raw_scores", l.raw_scores},
                          {"normalized_scores", l.normalized_scores}});
    return j;
}

void cmd_validate(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    auto nzr = near_zero_ratio(ds.series);
    nlohmann::ordered_json j;
    j["steps"] = ds.series.steps();
    j["sensors"] = ds.series.sensors();
    j["steps_per_period"] = ds.series.steps_per_period();
    j["near_zero_ratio"] = nzr.average;
    j["near_zero_ratio_per_sensor"] = nzr.per_sensor;
    for (auto which : {Split::Train, Split::Validation, Split::Test}) {
        auto r = split_range(ds.series.steps(), o.split(), which);
        const char* name = which == Split::Train ? "train" : which == Split::Validation ? "validation" : "test";
        j["splits"][name] = {{"begin", r.begin}, {"end", r.end}};
    }
    write_file(fs::path(o.out) / "validate.json", j.dump(2) + "\n");
    out << ds.series.steps() << " steps x " << ds.series.sensors() << " sensors, near-zero ratio "
        << format_double(100.0 * nzr.average) << "%\n";
}

void cmd_build(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    auto cfg = o.model_config(ds.series.steps_per_period());
    for (std::size_t s : resolve_sensors(o, ds.series)) {
        auto train = make_windows(ds.series, s, cfg.history, cfg.horizon, o.split(), Split::Train);
        auto bank = build_bank(train, cfg, s);
        save_bank(bank, bank_path(o.out, s));
        out << "sensor " << s << ": " << bank.size() << " entries x " << bank.num_layers() << " layers\n";
    }
}

void cmd_predict(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    auto cfg = o.model_config(ds.series.steps_per_period());
    const auto strategy = strategy_from_string(o.strategy);
    const auto target = parse_split(o.target);
    for (std::size_t s : resolve_sensors(o, ds.series)) {
        auto queries = make_windows(ds.series, s, cfg.history, cfg.horizon, o.split(), target);
        BatchResult result;
        if (strategy == Strategy::MemoryEfficient && o.banks.empty()) {
            auto train = make_windows(ds.series, s, cfg.history, cfg.horizon, o.split(), Split::Train);
            result = predict_batch_memory_efficient(train, queries, cfg, o.layers, o.trace);
        } else {
            auto bank = obtain_bank(o, ds.series, s, cfg);
            result = predict_batch(bank, queries, {o.layers, strategy, o.trace});
        }

        std::ostringstream csv;
        csv.precision(17);
        csv << "query,index";
        for (std::size_t i = 1; i <= cfg.horizon; ++i) csv << ",y" << i;
        csv << '\n';
        for (std::size_t q = 0; q < queries.size(); ++q) {
            csv << q << ',' << queries[q].index;
            for (double v : result.predictions.row(q)) csv << ',' << v;
            csv << '\n';
        }
        write_file(fs::path(o.out) / ("predictions_sensor_" + std::to_string(s) + ".csv"), csv.str());

        if (o.trace) {
            auto arr = nlohmann::ordered_json::array();
            for (std::size_t q = 0; q < result.traces.size(); ++q) arr.push_back(trace_json(result.traces[q], q));
            write_file(fs::path(o.out) / ("trace_sensor_" + std::to_string(s) + ".json"), arr.dump() + "\n");
        }
        out << "sensor " << s << ": " << queries.size() << " predictions\n";
    }
}

EvaluateOptions evaluate_options(const RunOptions& o) {
    EvaluateOptions e;
    e.strategy = strategy_from_string(o.strategy);
    e.sensors = o.sensors;
    e.split = o.split();
    e.target = parse_split(o.target);
    e.pooled = o.pooled;
    e.mape_threshold = o.mape_threshold;
    return e;
}

void write_summary(const RunOptions& o, nlohmann::ordered_json results) {
    nlohmann::ordered_json j;
    j["run"] = o.to_json();
    j["inputs"] = input_hashes(o);
    j["results"] = std::move(results);
    write_file(fs::path(o.out) / "summary.json", j.dump(2) + "\n");
}

void cmd_evaluate(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    auto eo = evaluate_options(o);
    Evaluation e;
    if (o.baseline == "hi") {
        e = evaluate_historical_inertia(ds.series, o.history, o.horizon, eo);
    } else if (o.baseline == "tsnn") {
        e = evaluate(ds.series, o.model_config(ds.series.steps_per_period()), eo);
    } else {
        throw UsageError("unknown baseline '" + o.baseline + "' (expected tsnn or hi)");
    }
    write_file(fs::path(o.out) / "metrics.csv", evaluation_to_csv(e));
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& s : e.per_sensor) {
        auto m = metric_json(s.metrics);
        m["sensor"] = s.sensor;
        per.push_back(m);
    }
    write_summary(o, {{"average", metric_json(e.average)}, {"per_sensor", per}});
    out << "MAE " << format_double(e.average.mae) << "  RMSE " << format_double(e.average.rmse) << "  MAPE "
        << (e.average.mape ? format_double(*e.average.mape) + "%" : std::string("n/a")) << '\n';
}

void cmd_sweep(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    const auto axis = sweep_axis_from_string(o.axis);
    if (o.grid.empty()) throw UsageError("--grid is required for sweep");
    std::vector<double> grid;
    for (const auto& g : o.grid) {
        if (axis == SweepAxis::Scaling) {
            grid.push_back(static_cast<double>(scaling_from_string(g)));
            continue;
        }
        try {
            grid.push_back(std::stod(g));
        } catch (const std::logic_error&) {
            throw UsageError("cannot parse grid value '" + g + "'");
        }
    }
    auto result = run_sweep(ds.series, o.model_config(ds.series.steps_per_period()), axis, grid, evaluate_options(o));
    write_file(fs::path(o.out) / ("sweep_" + o.axis + ".csv"), result.to_csv());
    write_file(fs::path(o.out) / ("sweep_" + o.axis + ".json"), result.to_json() + "\n");
    write_summary(o, nlohmann::ordered_json::parse(result.to_json()));
    out << result.to_csv();
}

void cmd_explain(const RunOptions& o, std::ostream& out) {
    auto ds = load_dataset(o);
    if (o.sensors.size() != 1) throw UsageError("explain needs exactly one --sensors value");
    if (o.queries.empty()) throw UsageError("explain needs --query");
    const std::size_t sensor = resolve_sensors(o, ds.series).front();
    auto cfg = o.model_config(ds.series.steps_per_period());
    auto bank = obtain_bank(o, ds.series, sensor, cfg);
    if (o.layers > bank.num_layers()) throw UsageError("--layers exceeds the bank depth");
    auto windows = make_windows(ds.series, sensor, bank.config().history, bank.config().horizon, o.split(),
                                parse_split(o.target));

    auto finish = [&](ContributionReport& r) {
        r.by_day = aggregate_by_source_day(r, ds.series.steps_per_period());
        if (ds.series.start_timestamp())
            r.by_weekday = aggregate_by_day_of_week(r, ds.series.steps_per_period(),
                                                    ds.series.step_interval_minutes(), ds.series.start_timestamp());
    };

    std::vector<ContributionReport> reports;
    for (std::size_t q : parse_index_list(o.queries)) {
        if (q >= windows.size())
            throw UsageError("query " + std::to_string(q) + " out of range (" + std::to_string(windows.size()) +
                             " windows in split)");
        auto p = predict(bank, windows[q].x, windows[q].periodic_step, o.layers, true);
        auto r = contributions(p, bank, q);
        if (!o.aggregate) {
            finish(r);
            auto stem = "explain_sensor_" + std::to_string(sensor) + "_query_" + std::to_string(q);
            write_file(fs::path(o.out) / (stem + ".json"), report_to_json(r) + "\n");
            write_file(fs::path(o.out) / (stem + ".csv"), report_to_csv(r));
        }
        reports.push_back(std::move(r));
    }
    if (o.aggregate) {
        auto r = accumulate(reports);
        finish(r);
        auto stem = "explain_sensor_" + std::to_string(sensor) + "_aggregate";
        write_file(fs::path(o.out) / (stem + ".json"), report_to_json(r) + "\n");
        write_file(fs::path(o.out) / (stem + ".csv"), report_to_csv(r));
        if (r.by_weekday) out << "top weekday: " << kWeekdayNames[argmax_weekday(*r.by_weekday)] << '\n';
    }
    out << "explained " << reports.size() << " queries for sensor " << sensor << '\n';
}

void cmd_synth(const RunOptions& o, std::ostream& out) {
    SyntheticSpec spec;
    spec.steps = o.steps;
    spec.steps_per_period = o.period;
    spec.sensors = o.num_sensors;
    spec.noise_fraction = o.noise;
    spec.seed = o.seed;
    auto series = synthetic_series(spec);
    std::ostringstream csv;
    csv.precision(17);
    for (std::size_t i = 0; i < series.steps(); ++i) {
        for (std::size_t s = 0; s < series.sensors(); ++s) csv << (s ? "," : "") << series.at(i, s);
        csv << '\n';
    }
    write_file(fs::path(o.out) / "synthetic.csv", csv.str());
    DataManifest m;
    m.steps_per_period = o.period;
    m.step_interval_minutes = 1440.0 / static_cast<double>(o.period);
    m.start_timestamp = parse_timestamp("2024-01-01T00:00:00");
    write_file(fs::path(o.out) / "synthetic.json", m.to_json_text() + "\n");
    out << "wrote " << series.steps() << " x " << series.sensors() << " synthetic series\n";
}

void emit_error(std::ostream& err, bool as_json, const char* kind, const std::string& message, int code) {
    if (as_json) {
        nlohmann::ordered_json j;
        j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
        err << j.dump() << '\n';
    } else {
        err << "tsnn: " << kind << " error: " << message << '\n';
    }
}

}  // namespace

void execute(const RunOptions& o, std::ostream& out) {
    set_max_threads(o.threads);
    fs::create_directories(o.out);
    // The manifest is written before any computation.
    write_file(fs::path(o.out) / "run_manifest.json", o.to_json().dump(2) + "\n");

    if (o.command == "validate") return cmd_validate(o, out);
    if (o.command == "build") return cmd_build(o, out);
    if (o.command == "predict") return cmd_predict(o, out);
    if (o.command == "evaluate") return cmd_evaluate(o, out);
    if (o.command == "sweep") return cmd_sweep(o, out);
    if (o.command == "explain") return cmd_explain(o, out);
    if (o.command == "synth") return cmd_synth(o, out);
    throw UsageError("unknown command '" + o.command + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Non-parametric layered memory-bank forecaster", "tsnn"};
    app.require_subcommand(1);
    RunOptions o;
    std::string run_manifest;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--data", o.data, "CSV data file (rows = steps, columns = sensors)");
        c->add_option("--manifest", o.manifest, "JSON manifest (default: data path with .json)");
        c->add_option("--out", o.out, "Output directory")->capture_default_str();
        c->add_option("--sensors", o.sensors, "Comma-separated sensor columns (default: all)")->delimiter(',');
        c->add_option("--threads", o.threads, "Worker thread cap (0 = all cores)")->capture_default_str();
        c->add_option("--seed", o.seed, "Seed for synthetic generation")->capture_default_str();
        c->add_flag("--json", o.json, "Structured JSON errors on stderr");
        c->add_option("--train", o.train, "Train fraction")->capture_default_str();
        c->add_option("--validation", o.validation, "Validation fraction")->capture_default_str();
        c->add_option("--test", o.test, "Test fraction")->capture_default_str();
    };
    auto add_model = [&](CLI::App* c) {
        c->add_option("--layers", o.layers, "Number of layers L")->capture_default_str();
        c->add_option("--gamma", o.gamma, "Score scale gamma")->capture_default_str();
        c->add_option("--beta", o.beta, "Score temperature beta")->capture_default_str();
        c->add_option("--tolerance", o.tolerance, "Layer-1 periodic-step tolerance")->capture_default_str();
        c->add_option("--scaling", o.scaling, "Score scaling")
            ->check(CLI::IsMember({"exp", "complement", "invsq", "sigmoid"}))
            ->capture_default_str();
        c->add_option("--epsilon", o.epsilon, "Inverse-square epsilon")->capture_default_str();
        c->add_option("--mu", o.mu, "Sigmoid offset mu")->capture_default_str();
        c->add_option("--history", o.history, "History length T")->capture_default_str();
        c->add_option("--horizon", o.horizon, "Horizon length T'")->capture_default_str();
        c->add_option("--strategy", o.strategy, "Execution strategy")
            ->check(CLI::IsMember({"standard", "mem-efficient"}))
            ->capture_default_str();
        c->add_option("--split", o.target, "Split to predict/evaluate")
            ->check(CLI::IsMember({"train", "validation", "test"}))
            ->capture_default_str();
        c->add_option("--banks", o.banks, "Directory of prebuilt bank files");
    };

    auto* validate = app.add_subcommand("validate", "Ingest and check a dataset");
    add_common(validate);
    auto* build = app.add_subcommand("build", "Build one memory bank per sensor");
    add_common(build);
    add_model(build);
    auto* predict_cmd = app.add_subcommand("predict", "Forecast the target split");
    add_common(predict_cmd);
    add_model(predict_cmd);
    predict_cmd->add_flag("--trace", o.trace, "Write per-layer traces");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score forecasts against ground truth");
    add_common(evaluate_cmd);
    add_model(evaluate_cmd);
    evaluate_cmd->add_flag("--pooled", o.pooled, "Pool errors across sensors instead of averaging per sensor");
    evaluate_cmd->add_option("--mape-threshold", o.mape_threshold, "Mask |y| <= threshold in MAPE")
        ->capture_default_str();
    evaluate_cmd->add_option("--baseline", o.baseline, "Model to score")
        ->check(CLI::IsMember({"tsnn", "hi"}))
        ->capture_default_str();
    auto* sweep = app.add_subcommand("sweep", "Evaluate along one hyperparameter axis");
    add_common(sweep);
    add_model(sweep);
    sweep->add_flag("--pooled", o.pooled, "Pool errors across sensors");
    sweep->add_option("--axis", o.axis, "layers | gamma | beta | tolerance | scaling")
        ->check(CLI::IsMember({"layers", "gamma", "beta", "tolerance", "scaling"}))
        ->capture_default_str();
    sweep->add_option("--grid", o.grid, "Comma-separated grid values")->delimiter(',');
    auto* explain = app.add_subcommand("explain", "Per-entry contribution reports");
    add_common(explain);
    add_model(explain);
    explain->add_option("--query", o.queries, "Query window indices within the split (i or a-b)")->delimiter(',');
    explain->add_flag("--aggregate", o.aggregate, "Sum the queries into one report");
    auto* synth = app.add_subcommand("synth", "Write a synthetic periodic dataset");
    add_common(synth);
    synth->add_option("--steps", o.steps, "Number of steps")->capture_default_str();
    synth->add_option("--period", o.period, "Steps per period")->capture_default_str();
    synth->add_option("--num-sensors", o.num_sensors, "Number of sensors")->capture_default_str();
    synth->add_option("--noise", o.noise, "Noise sigma as a fraction of amplitude")->capture_default_str();
    auto* rerun = app.add_subcommand("rerun", "Repeat a run from its run_manifest.json");
    rerun->add_option("run_manifest", run_manifest, "Path to run_manifest.json")->required();
    rerun->add_flag("--json", o.json, "Structured JSON errors on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        bool as_json = false;
        for (int i = 1; i < argc; ++i) as_json |= std::string(argv[i]) == "--json";
        emit_error(err, as_json, "usage", e.what(), 1);
        return 1;
    }

    try {
        if (rerun->parsed()) {
            std::ifstream f(run_manifest);
            if (!f) throw DataError("cannot open run manifest " + run_manifest);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(f);
            } catch (const nlohmann::json::exception& e) {
                throw DataError(std::string("run manifest is not valid JSON: ") + e.what());
            }
            bool as_json = o.json;
            o = RunOptions::from_json(j);
            o.json = o.json || as_json;
        } else {
            o.command = app.get_subcommands().front()->get_name();
        }
        if (o.layers < 1) throw UsageError("--layers must be >= 1");
        execute(o, out);
    } catch (const Error& e) {
        emit_error(err, o.json, e.kind(), e.what(), e.exit_code());
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        emit_error(err, o.json, "data", e.what(), 2);
        return 2;
    } catch (const std::exception& e) {
        emit_error(err, o.json, "computation", e.what(), 3);
        return 3;
    }
    return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"tsnn"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tsnn::cli
