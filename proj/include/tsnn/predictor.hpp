#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tsnn/bank.hpp"
#include "tsnn/dataset.hpp"
#include "tsnn/matrix.hpp"

namespace tsnn {

enum class Strategy { Standard, MemoryEfficient };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);  // standard | mem-efficient

/// What one layer did for one query.
struct LayerTrace {
    std::size_t layer = 0;                    // 1-based
    std::vector<std::size_t> candidate_rows;  // rows into the bank
    std::vector<std::size_t> candidate_ids;   // entry ids of those rows
    std::vector<double> raw_scores;
    std::vector<double> normalized_scores;
    std::vector<double> prediction;           // layer prediction, length T'
    std::vector<double> residual_input;       // X^(l), length T
    double input_mean = 0.0;                  // 0 at layer 1
};

struct PredictionTrace {
    std::vector<LayerTrace> layers;
    std::vector<double> final_prediction;
};

struct Prediction {
    std::vector<double> values;
    std::optional<PredictionTrace> trace;
};

/// Layered retrieval of one query. exclude_row removes a bank row from every
/// candidate set (leave-one-out prediction of a training entry).
Prediction predict(const MemoryBank& bank, std::span<const double> query_x, std::size_t query_periodic_step,
                   std::size_t num_layers, bool capture_trace = false,
                   std::optional<std::size_t> exclude_row = std::nullopt);

/// Sum of the first k layer predictions of a trace.
std::vector<double> truncate_layers(const PredictionTrace& trace, std::size_t k);

/// Tracks bytes held by training residual arrays.
struct ResidualStorage {
    std::size_t current = 0;
    std::size_t peak = 0;

    void acquire(std::size_t bytes) {
        current += bytes;
        if (current > peak) peak = current;
    }
    void release(std::size_t bytes) { current -= bytes; }
};

struct BatchOptions {
    std::size_t num_layers = 0;  // 0 selects every layer of the bank / config
    Strategy strategy = Strategy::Standard;
    bool capture_traces = false;
};

struct BatchResult {
    RowMatrix predictions;                 // queries x T'
    std::vector<RowMatrix> layer_predictions;  // per layer, queries x T'
    std::vector<PredictionTrace> traces;   // filled when capture_traces is set
    ResidualStorage storage;               // training residual bytes held by the strategy

    /// Sum of the first k layer predictions for every query.
    RowMatrix cumulative(std::size_t k) const;
};

/// Standard consumes the bank's stored layers. MemoryEfficient uses only the
/// bank's first (raw) layer and rebuilds deeper layers on the fly, keeping at
/// most two layers of training residuals alive.
BatchResult predict_batch(const MemoryBank& bank, std::span<const SeriesWindow> queries, const BatchOptions& options);

/// Memory-efficient prediction straight from training windows; no bank is
/// ever materialized.
BatchResult predict_batch_memory_efficient(std::span<const SeriesWindow> train_windows,
                                           std::span<const SeriesWindow> queries, const ModelConfig& config,
                                           std::size_t num_layers = 0, bool capture_traces = false);

}  // namespace tsnn
