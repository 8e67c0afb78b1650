#include "tsnn/predictor.hpp"

#include <algorithm>

#include "tsnn/error.hpp"
#include "tsnn/parallel.hpp"

namespace tsnn {

std::string to_string(Strategy s) { return s == Strategy::Standard ? "standard" : "mem-efficient"; }

Strategy strategy_from_string(const std::string& name) {
    if (name == "standard") return Strategy::Standard;
    if (name == "mem-efficient" || name == "memory-efficient") return Strategy::MemoryEfficient;
    throw UsageError("unknown strategy '" + name + "' (expected standard or mem-efficient)");
}

namespace {

struct QueryState {
    std::vector<double> x;  // residual input of the next layer
    std::size_t periodic_step = 0;
    std::optional<std::size_t> exclude_row;
    std::vector<double> total;
    std::vector<std::vector<double>> layer_predictions;
    std::optional<PredictionTrace> trace;
};

QueryState start_query(std::span<const double> x, std::size_t periodic_step, std::size_t horizon, bool capture,
                       std::optional<std::size_t> exclude_row) {
    QueryState s;
    s.x.assign(x.begin(), x.end());
    s.periodic_step = periodic_step;
    s.exclude_row = exclude_row;
    s.total.assign(horizon, 0.0);
    if (capture) s.trace.emplace();
    return s;
}

void advance(QueryState& s, const LayerResiduals& layer, std::span<const std::size_t> periodic_steps,
             std::span<const std::size_t> entry_ids, std::size_t layer_no, const ModelConfig& cfg) {
    auto candidates =
        candidate_set(periodic_steps, s.periodic_step, s.exclude_row, layer_no, cfg.tolerance, cfg.steps_per_period);
    if (candidates.empty())
        throw ComputationError("no bank entries within tolerance " + std::to_string(cfg.tolerance) +
                               " of periodic step " + std::to_string(s.periodic_step) + " at layer " +
                               std::to_string(layer_no));
    auto m = match_layer(s.x, layer, std::move(candidates), layer_no > 1, cfg.kernel);
    for (std::size_t i = 0; i < s.total.size(); ++i) s.total[i] += m.prediction[i];
    if (s.trace) {
        LayerTrace t;
        t.layer = layer_no;
        t.candidate_ids.reserve(m.scores.candidates.size());
        for (std::size_t row : m.scores.candidates) t.candidate_ids.push_back(entry_ids[row]);
        t.candidate_rows = std::move(m.scores.candidates);
        t.raw_scores = std::move(m.scores.raw);
        t.normalized_scores = std::move(m.scores.normalized);
        t.prediction = m.prediction;
        t.residual_input = s.x;
        t.input_mean = m.input_mean;
        s.trace->layers.push_back(std::move(t));
    }
    s.layer_predictions.push_back(std::move(m.prediction));
    s.x = std::move(m.next_x);
}

void check_query(std::span<const double> x, const ModelConfig& cfg) {
    if (x.size() != cfg.history)
        throw DataError("query has " + std::to_string(x.size()) + " steps, bank expects T = " +
                        std::to_string(cfg.history));
}

std::size_t resolve_layers(std::size_t requested, std::size_t available) {
    if (requested == 0) return available;
    if (requested > available)
        throw UsageError("requested " + std::to_string(requested) + " layers but only " + std::to_string(available) +
                         " are available");
    return requested;
}

BatchResult collect(std::vector<QueryState>& states, std::size_t layers, std::size_t horizon) {
    BatchResult out;
    out.predictions = RowMatrix(states.size(), horizon);
    out.layer_predictions.assign(layers, RowMatrix(states.size(), horizon));
    for (std::size_t q = 0; q < states.size(); ++q) {
        std::copy(states[q].total.begin(), states[q].total.end(), out.predictions.row(q).begin());
        for (std::size_t l = 0; l < layers; ++l)
            std::copy(states[q].layer_predictions[l].begin(), states[q].layer_predictions[l].end(),
                      out.layer_predictions[l].row(q).begin());
        if (states[q].trace) {
            states[q].trace->final_prediction = states[q].total;
            out.traces.push_back(std::move(*states[q].trace));
        }
    }
    return out;
}

BatchResult memory_efficient(LayerResiduals first, std::span<const std::size_t> periodic_steps,
                             std::span<const std::size_t> entry_ids, std::span<const SeriesWindow> queries,
                             const ModelConfig& cfg, std::size_t layers, bool capture) {
    std::vector<QueryState> states;
    states.reserve(queries.size());
    for (const auto& q : queries) {
        check_query(q.x, cfg);
        states.push_back(start_query(q.x, q.periodic_step, cfg.horizon, capture, std::nullopt));
    }

    ResidualStorage storage;
    LayerResiduals current = std::move(first);
    storage.acquire(current.bytes());
    for (std::size_t l = 1; l <= layers; ++l) {
        parallel_for(states.size(), [&](std::size_t q) { advance(states[q], current, periodic_steps, entry_ids, l, cfg); });
        if (l == layers) break;
        LayerResiduals next = next_layer_residuals(current, periodic_steps, l, cfg);
        storage.acquire(next.bytes());
        storage.release(current.bytes());
        current = std::move(next);
    }
    storage.release(current.bytes());

    auto out = collect(states, layers, cfg.horizon);
    out.storage = storage;
    return out;
}

}  // namespace

Prediction predict(const MemoryBank& bank, std::span<const double> query_x, std::size_t query_periodic_step,
                   std::size_t num_layers, bool capture_trace, std::optional<std::size_t> exclude_row) {
    const auto& cfg = bank.config();
    check_query(query_x, cfg);
    if (num_layers < 1 || num_layers > bank.num_layers())
        throw UsageError("num_layers must be in [1, " + std::to_string(bank.num_layers()) + "]");
    if (query_periodic_step >= cfg.steps_per_period) throw DataError("query periodic step outside [0, t)");

    auto s = start_query(query_x, query_periodic_step, cfg.horizon, capture_trace, exclude_row);
    for (std::size_t l = 1; l <= num_layers; ++l)
        advance(s, bank.layer(l - 1), bank.periodic_steps(), bank.entry_ids(), l, cfg);

    Prediction p;
    p.values = s.total;
    if (s.trace) {
        s.trace->final_prediction = s.total;
        p.trace = std::move(s.trace);
    }
    return p;
}

std::vector<double> truncate_layers(const PredictionTrace& trace, std::size_t k) {
    if (k < 1) throw UsageError("truncation depth must be >= 1");
    if (k > trace.layers.size())
        throw UsageError("trace has " + std::to_string(trace.layers.size()) + " layers, cannot keep " +
                         std::to_string(k));
    std::vector<double> out(trace.layers.front().prediction.size(), 0.0);
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += trace.layers[l].prediction[i];
    return out;
}

RowMatrix BatchResult::cumulative(std::size_t k) const {
    if (k < 1 || k > layer_predictions.size()) throw UsageError("cumulative depth out of range");
    RowMatrix out(predictions.rows(), predictions.cols());
    for (std::size_t l = 0; l < k; ++l) {
        auto src = layer_predictions[l].data();
        auto dst = out.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return out;
}

BatchResult predict_batch(const MemoryBank& bank, std::span<const SeriesWindow> queries, const BatchOptions& options) {
    const auto& cfg = bank.config();
    const std::size_t layers = resolve_layers(options.num_layers, bank.num_layers());

    if (options.strategy == Strategy::MemoryEfficient) {
        if (bank.num_layers() < 1) throw DataError("memory-efficient prediction needs the bank's raw first layer");
        return memory_efficient(bank.layer(0), bank.periodic_steps(), bank.entry_ids(), queries, cfg, layers,
                                options.capture_traces);
    }

    std::vector<QueryState> states(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        check_query(queries[q].x, cfg);
        states[q] = start_query(queries[q].x, queries[q].periodic_step, cfg.horizon, options.capture_traces, std::nullopt);
        for (std::size_t l = 1; l <= layers; ++l)
            advance(states[q], bank.layer(l - 1), bank.periodic_steps(), bank.entry_ids(), l, cfg);
    });
    auto out = collect(states, layers, cfg.horizon);
    out.storage.acquire(bank.residual_bytes());
    return out;
}

BatchResult predict_batch_memory_efficient(std::span<const SeriesWindow> train_windows,
                                           std::span<const SeriesWindow> queries, const ModelConfig& config,
                                           std::size_t num_layers, bool capture_traces) {
    config.validate();
    if (train_windows.size() < 2) throw DataError("memory-efficient prediction needs at least 2 training windows");
    const std::size_t layers = resolve_layers(num_layers, config.layers);
    std::vector<std::size_t> ids;
    std::vector<std::size_t> steps;
    for (const auto& w : train_windows) {
        if (w.periodic_step >= config.steps_per_period)
            throw DataError("window " + std::to_string(w.index) + " has periodic step outside [0, t)");
        ids.push_back(w.index);
        steps.push_back(w.periodic_step);
    }
    return memory_efficient(first_layer(train_windows, config.history, config.horizon), steps, ids, queries, config,
                            layers, capture_traces);
}

}  // namespace tsnn
