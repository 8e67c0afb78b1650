#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tsnn/bank.hpp"
#include "tsnn/dataset.hpp"
#include "tsnn/error.hpp"
#include "tsnn/eval.hpp"
#include "tsnn/interpret.hpp"
#include "tsnn/parallel.hpp"
#include "tsnn/predictor.hpp"

namespace py = pybind11;
using namespace tsnn;

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

RowMatrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw UsageError("expected a 2-d array");
    RowMatrix m(a.shape(0), a.shape(1));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Array to_array(const RowMatrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Array to_array(const std::vector<double>& v) {
    Array out(v.size());
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw UsageError("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

RawSeries to_series(const Array& values, std::size_t steps_per_period) {
    return RawSeries(to_matrix(values), steps_per_period);
}

std::vector<SeriesWindow> to_windows(const Array& x, const Array& y, const std::vector<std::size_t>& index,
                                     std::size_t period) {
    auto X = to_matrix(x);
    auto Y = to_matrix(y);
    if (X.rows() != Y.rows() || X.rows() != index.size()) throw UsageError("x, y and index lengths differ");
    std::vector<SeriesWindow> out;
    for (std::size_t j = 0; j < X.rows(); ++j)
        out.push_back({{X.row(j).begin(), X.row(j).end()}, {Y.row(j).begin(), Y.row(j).end()}, index[j],
                       index[j] % period});
    return out;
}

py::dict metrics_dict(const MetricSet& m) {
    py::dict d;
    d["mae"] = m.mae;
    d["rmse"] = m.rmse;
    d["mape"] = m.mape ? py::cast(*m.mape) : py::none();
    d["count"] = m.count;
    d["mape_masked"] = m.mape_masked;
    return d;
}

py::dict evaluation_dict(const Evaluation& e) {
    py::dict d;
    d["average"] = metrics_dict(e.average);
    py::dict per;
    for (const auto& s : e.per_sensor) per[py::int_(s.sensor)] = metrics_dict(s.metrics);
    d["per_sensor"] = per;
    return d;
}

py::dict trace_dict(const PredictionTrace& t) {
    py::list layers;
    for (const auto& l : t.layers) {
        py::dict d;
        d["layer"] = l.layer;
        d["candidate_ids"] = l.candidate_ids;
        d["raw_scores"] = to_array(l.raw_scores);
        d["normalized_scores"] = to_array(l.normalized_scores);
        d["prediction"] = to_array(l.prediction);
        d["residual_input"] = to_array(l.residual_input);
        d["input_mean"] = l.input_mean;
        layers.append(d);
    }
    py::dict out;
    out["layers"] = layers;
    out["final_prediction"] = to_array(t.final_prediction);
    return out;
}

}  // namespace

PYBIND11_MODULE(_tsnn, m) {
    m.doc() = "Layered memory-bank forecaster for periodic time series";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<UsageError>(m, "UsageError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<ComputationError>(m, "ComputationError", base.ptr());

    py::enum_<Scaling>(m, "Scaling")
        .value("EXPONENTIAL", Scaling::Exponential)
        .value("COMPLEMENT", Scaling::Complement)
        .value("INVERSE_SQUARE", Scaling::InverseSquare)
        .value("SIGMOID", Scaling::Sigmoid);

    py::enum_<Strategy>(m, "Strategy")
        .value("STANDARD", Strategy::Standard)
        .value("MEMORY_EFFICIENT", Strategy::MemoryEfficient);

    py::class_<ModelConfig>(m, "Config")
        .def(py::init([](std::size_t layers, double gamma, double beta, std::size_t tolerance,
                         std::size_t steps_per_period, std::size_t history, std::size_t horizon, Scaling scaling) {
                 ModelConfig c;
                 c.layers = layers;
                 c.kernel.gamma = gamma;
                 c.kernel.beta = beta;
                 c.kernel.scaling = scaling;
                 c.tolerance = tolerance;
                 c.steps_per_period = steps_per_period;
                 c.history = history;
                 c.horizon = horizon;
                 c.validate();
                 return c;
             }),
             py::kw_only(), py::arg("layers") = 10, py::arg("gamma") = 10.0, py::arg("beta") = 1.5,
             py::arg("tolerance") = 3, py::arg("steps_per_period") = 288, py::arg("history") = 12,
             py::arg("horizon") = 12, py::arg("scaling") = Scaling::Exponential)
        .def_readwrite("layers", &ModelConfig::layers)
        .def_readwrite("tolerance", &ModelConfig::tolerance)
        .def_readwrite("steps_per_period", &ModelConfig::steps_per_period)
        .def_readwrite("history", &ModelConfig::history)
        .def_readwrite("horizon", &ModelConfig::horizon)
        .def_property(
            "gamma", [](const ModelConfig& c) { return c.kernel.gamma; },
            [](ModelConfig& c, double v) { c.kernel.gamma = v; })
        .def_property(
            "beta", [](const ModelConfig& c) { return c.kernel.beta; },
            [](ModelConfig& c, double v) { c.kernel.beta = v; })
        .def_property(
            "scaling", [](const ModelConfig& c) { return c.kernel.scaling; },
            [](ModelConfig& c, Scaling v) { c.kernel.scaling = v; })
        .def("__repr__", [](const ModelConfig& c) {
            return "Config(layers=" + std::to_string(c.layers) + ", gamma=" + std::to_string(c.kernel.gamma) +
                   ", beta=" + std::to_string(c.kernel.beta) + ", tolerance=" + std::to_string(c.tolerance) +
                   ", steps_per_period=" + std::to_string(c.steps_per_period) + ")";
        });

    m.def(
        "load_csv",
        [](const std::filesystem::path& csv, const std::filesystem::path& manifest) {
            auto s = ingest(csv, manifest);
            return py::make_tuple(to_array(s.values()), s.steps_per_period());
        },
        py::arg("csv"), py::arg("manifest"), "Returns (values[steps, sensors], steps_per_period).");

    m.def(
        "synthetic",
        [](std::size_t steps, std::size_t sensors, std::size_t period, double noise, std::uint64_t seed) {
            SyntheticSpec spec;
            spec.steps = steps;
            spec.sensors = sensors;
            spec.steps_per_period = period;
            spec.noise_fraction = noise;
            spec.seed = seed;
            return to_array(synthetic_series(spec).values());
        },
        py::arg("steps") = 2016, py::arg("sensors") = 1, py::arg("period") = 48, py::arg("noise") = 0.0,
        py::arg("seed") = 7);

    m.def(
        "windows",
        [](const Array& column, std::size_t history, std::size_t horizon, std::size_t period, const std::string& split) {
            auto col = to_vector(column);
            Split which = split == "train" ? Split::Train : split == "validation" ? Split::Validation
                          : split == "test" ? Split::Test
                                            : throw UsageError("split must be train, validation or test");
            auto w = make_windows(col, split_range(col.size(), SplitSpec{}, which), history, horizon, period);
            RowMatrix X(w.size(), history), Y(w.size(), horizon);
            std::vector<std::size_t> idx;
            for (std::size_t j = 0; j < w.size(); ++j) {
                std::copy(w[j].x.begin(), w[j].x.end(), X.row(j).begin());
                std::copy(w[j].y.begin(), w[j].y.end(), Y.row(j).begin());
                idx.push_back(w[j].index);
            }
            return py::make_tuple(to_array(X), to_array(Y), idx);
        },
        py::arg("column"), py::arg("history") = 12, py::arg("horizon") = 12, py::arg("period") = 288,
        py::arg("split") = "train", "Returns (X, Y, start_indices) for one split of a 6:2:2 chronological split.");

    py::class_<MemoryBank>(m, "Bank")
        .def(py::init([](const Array& x, const Array& y, const std::vector<std::size_t>& index,
                         const ModelConfig& config, std::size_t sensor) {
                 auto w = to_windows(x, y, index, config.steps_per_period);
                 py::gil_scoped_release release;
                 return build_bank(w, config, sensor);
             }),
             py::arg("x"), py::arg("y"), py::arg("index"), py::arg("config"), py::arg("sensor") = 0)
        .def_static("load", &load_bank, py::arg("path"))
        .def("save", [](const MemoryBank& b, const std::filesystem::path& p) { save_bank(b, p); }, py::arg("path"))
        .def_property_readonly("config", &MemoryBank::config)
        .def_property_readonly("sensor", &MemoryBank::sensor_id)
        .def_property_readonly("num_layers", &MemoryBank::num_layers)
        .def("__len__", &MemoryBank::size)
        .def("__eq__", [](const MemoryBank& a, const MemoryBank& b) { return a == b; })
        .def(
            "residuals",
            [](const MemoryBank& b, std::size_t layer) {
                const auto& l = b.layer(layer);
                return py::make_tuple(to_array(l.x), to_array(l.y));
            },
            py::arg("layer"), "Residual pair (X, Y) stored at a zero-based layer.")
        .def(
            "predict",
            [](const MemoryBank& b, const Array& x, std::size_t periodic_step, std::size_t layers, bool trace) {
                auto q = to_vector(x);
                auto p = predict(b, q, periodic_step, layers ? layers : b.num_layers(), trace);
                if (!trace) return py::object(to_array(p.values));
                return py::object(py::make_tuple(to_array(p.values), trace_dict(*p.trace)));
            },
            py::arg("x"), py::arg("periodic_step"), py::arg("layers") = 0, py::arg("trace") = false)
        .def(
            "predict_batch",
            [](const MemoryBank& b, const Array& x, const std::vector<std::size_t>& index, std::size_t layers,
               Strategy strategy) {
                auto X = to_matrix(x);
                if (X.rows() != index.size()) throw UsageError("x and index lengths differ");
                std::vector<SeriesWindow> queries;
                for (std::size_t j = 0; j < X.rows(); ++j)
                    queries.push_back({{X.row(j).begin(), X.row(j).end()}, {}, index[j],
                                       index[j] % b.config().steps_per_period});
                BatchResult r;
                {
                    py::gil_scoped_release release;
                    r = predict_batch(b, queries, {layers, strategy, false});
                }
                return to_array(r.predictions);
            },
            py::arg("x"), py::arg("index"), py::arg("layers") = 0, py::arg("strategy") = Strategy::Standard,
            "Forecasts for windows whose first steps are `index`.")
        .def(
            "contributions",
            [](const MemoryBank& b, const Array& x, std::size_t periodic_step, std::size_t layers) {
                auto q = to_vector(x);
                auto p = predict(b, q, periodic_step, layers ? layers : b.num_layers(), true);
                auto report = contributions(p, b);
                std::vector<double> values;
                for (const auto& e : report.entries) values.push_back(e.value);
                return py::make_tuple(std::vector<std::size_t>(b.entry_ids().begin(), b.entry_ids().end()),
                                      to_array(values));
            },
            py::arg("x"), py::arg("periodic_step"), py::arg("layers") = 0,
            "Returns (entry_ids, contribution per entry).");

    m.def(
        "metrics",
        [](const Array& pred, const Array& truth, double threshold) {
            auto p = to_vector(pred.attr("ravel")().cast<Array>());
            auto t = to_vector(truth.attr("ravel")().cast<Array>());
            return metrics_dict(metrics(p, t, threshold));
        },
        py::arg("prediction"), py::arg("truth"), py::arg("mape_threshold") = 0.0);

    m.def(
        "evaluate",
        [](const Array& values, const ModelConfig& config, Strategy strategy, bool pooled,
           std::vector<std::size_t> sensors) {
            auto series = to_series(values, config.steps_per_period);
            EvaluateOptions o;
            o.strategy = strategy;
            o.pooled = pooled;
            o.sensors = std::move(sensors);
            Evaluation e;
            {
                py::gil_scoped_release release;
                e = evaluate(series, config, o);
            }
            return evaluation_dict(e);
        },
        py::arg("values"), py::arg("config"), py::arg("strategy") = Strategy::Standard, py::arg("pooled") = false,
        py::arg("sensors") = std::vector<std::size_t>{},
        "Train on the first 60% of each sensor, score the last 20%.");

    m.def(
        "near_zero_ratio", [](const Array& values) { return near_zero_ratio(to_series(values, 2)).average; },
        py::arg("values"));

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
