#include "tsnn/bank.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tsnn/error.hpp"
#include "tsnn/parallel.hpp"

namespace tsnn {

void ModelConfig::validate() const {
    kernel.validate();
    if (layers < 1) throw UsageError("number of layers must be >= 1");
    if (steps_per_period < 2) throw UsageError("steps_per_period must be >= 2");
    if (history < 1 || horizon < 1) throw UsageError("history and horizon lengths must be >= 1");
    if (tolerance >= steps_per_period) throw UsageError("tolerance must be smaller than the period");
}

MemoryBank::MemoryBank(ModelConfig config, std::size_t sensor_id, std::vector<std::size_t> entry_ids,
                       std::vector<std::size_t> periodic_steps, std::vector<LayerResiduals> layers)
    : config_(std::move(config)),
      sensor_id_(sensor_id),
      entry_ids_(std::move(entry_ids)),
      periodic_steps_(std::move(periodic_steps)),
      layers_(std::move(layers)) {
    config_.validate();
    if (entry_ids_.size() != periodic_steps_.size()) throw DataError("bank entry id / periodic step count mismatch");
    if (layers_.size() != config_.layers) throw DataError("bank layer count does not match its config");
    if (std::set<std::size_t>(entry_ids_.begin(), entry_ids_.end()).size() != entry_ids_.size())
        throw DataError("bank entry ids are not unique");
    for (std::size_t p : periodic_steps_)
        if (p >= config_.steps_per_period) throw DataError("bank periodic step outside [0, t)");
    for (const auto& layer : layers_) {
        if (layer.x.rows() != size() || layer.y.rows() != size() || layer.x_mean.size() != size())
            throw DataError("bank layer row count mismatch");
        if (layer.x.cols() != config_.history || layer.y.cols() != config_.horizon)
            throw DataError("bank layer width does not match T / T'");
    }
}

BankEntry MemoryBank::entry(std::size_t row) const {
    BankEntry e{entry_id(row), periodic_step(row), {}, {}};
    for (const auto& layer : layers_) {
        e.x.push_back(layer.x.row(row));
        e.y.push_back(layer.y.row(row));
    }
    return e;
}

std::size_t MemoryBank::residual_bytes() const noexcept {
    std::size_t total = 0;
    for (const auto& layer : layers_) total += layer.bytes();
    return total;
}

std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t period) {
    std::size_t d = a > b ? a - b : b - a;
    d %= period;
    return std::min(d, period - d);
}

std::vector<std::size_t> candidate_set(std::span<const std::size_t> periodic_steps, std::size_t query_periodic_step,
                                       std::optional<std::size_t> exclude_row, std::size_t layer,
                                       std::size_t tolerance, std::size_t period) {
    if (layer < 1) throw UsageError("layers are numbered from 1");
    std::vector<std::size_t> rows;
    rows.reserve(layer == 1 ? 0 : periodic_steps.size());
    for (std::size_t k = 0; k < periodic_steps.size(); ++k) {
        if (exclude_row && *exclude_row == k) continue;
        if (layer == 1 && circular_distance(periodic_steps[k], query_periodic_step, period) > tolerance) continue;
        rows.push_back(k);
    }
    return rows;
}

std::vector<std::size_t> candidate_set(const MemoryBank& bank, std::size_t query_periodic_step,
                                       std::optional<std::size_t> exclude_row, std::size_t layer) {
    return candidate_set(bank.periodic_steps(), query_periodic_step, exclude_row, layer, bank.config().tolerance,
                         bank.config().steps_per_period);
}

double mean_of(std::span<const double> values) {
    if (values.empty()) throw ComputationError("mean of an empty vector");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

LayerMatch match_layer(std::span<const double> x, const LayerResiduals& layer, std::vector<std::size_t> candidates,
                       bool mean_decoupled, const KernelConfig& kernel) {
    if (candidates.empty()) throw ComputationError("empty candidate set");
    if (x.size() != layer.x.cols()) throw ComputationError("query length does not match bank history length");

    LayerMatch m;
    m.input_mean = mean_decoupled ? mean_of(x) : 0.0;

    std::vector<double> d(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const std::size_t k = candidates[c];
        const double offset = mean_decoupled ? layer.x_mean[k] : 0.0;
        d[c] = centered_distance(x, m.input_mean, layer.x.row(k), offset);
    }
    m.scores = scores_from_distances(std::move(candidates), d, kernel);

    // prediction = mean + sum a_k (y_k - mean_k); next_x = x - mean - sum a_k (x_k - mean_k)
    m.prediction.assign(layer.y.cols(), m.input_mean);
    m.next_x.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) m.next_x[i] = x[i] - m.input_mean;
    const auto& rows = m.scores.candidates;
    for (std::size_t c = 0; c < rows.size(); ++c) {
        const double a = m.scores.normalized[c];
        if (a == 0.0) continue;
        const std::size_t k = rows[c];
        const double offset = mean_decoupled ? layer.x_mean[k] : 0.0;
        auto yk = layer.y.row(k);
        auto xk = layer.x.row(k);
        for (std::size_t i = 0; i < yk.size(); ++i) m.prediction[i] += a * (yk[i] - offset);
        for (std::size_t i = 0; i < xk.size(); ++i) m.next_x[i] -= a * (xk[i] - offset);
    }
    return m;
}

namespace {

void fill_means(LayerResiduals& layer) {
    layer.x_mean.resize(layer.x.rows());
    for (std::size_t j = 0; j < layer.x.rows(); ++j) layer.x_mean[j] = mean_of(layer.x.row(j));
}

}  // namespace

LayerResiduals first_layer(std::span<const SeriesWindow> windows, std::size_t history, std::size_t horizon) {
    LayerResiduals layer{RowMatrix(windows.size(), history), RowMatrix(windows.size(), horizon), {}};
    for (std::size_t j = 0; j < windows.size(); ++j) {
        const auto& w = windows[j];
        if (w.x.size() != history || w.y.size() != horizon)
            throw DataError("window " + std::to_string(w.index) + " does not match T / T'");
        std::copy(w.x.begin(), w.x.end(), layer.x.row(j).begin());
        std::copy(w.y.begin(), w.y.end(), layer.y.row(j).begin());
    }
    fill_means(layer);
    return layer;
}

LayerResiduals next_layer_residuals(const LayerResiduals& current, std::span<const std::size_t> periodic_steps,
                                    std::size_t layer, const ModelConfig& config) {
    const std::size_t n = current.x.rows();
    LayerResiduals next{RowMatrix(n, current.x.cols()), RowMatrix(n, current.y.cols()), {}};
    parallel_for(n, [&](std::size_t j) {
        auto candidates =
            candidate_set(periodic_steps, periodic_steps[j], j, layer, config.tolerance, config.steps_per_period);
        if (candidates.empty())
            throw ComputationError("no layer-" + std::to_string(layer) + " candidates for periodic step " +
                                   std::to_string(periodic_steps[j]) + " within tolerance " +
                                   std::to_string(config.tolerance));
        auto m = match_layer(current.x.row(j), current, std::move(candidates), layer > 1, config.kernel);
        std::copy(m.next_x.begin(), m.next_x.end(), next.x.row(j).begin());
        auto y = current.y.row(j);
        auto out = next.y.row(j);
        for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] - m.prediction[i];
    });
    fill_means(next);
    return next;
}

MemoryBank build_bank(std::span<const SeriesWindow> train_windows, const ModelConfig& config, std::size_t sensor_id) {
    config.validate();
    if (train_windows.size() < 2) throw DataError("a memory bank needs at least 2 training windows");

    std::vector<std::size_t> ids;
    std::vector<std::size_t> steps;
    ids.reserve(train_windows.size());
    steps.reserve(train_windows.size());
    for (const auto& w : train_windows) {
        if (w.periodic_step >= config.steps_per_period)
            throw DataError("window " + std::to_string(w.index) + " has periodic step outside [0, t)");
        ids.push_back(w.index);
        steps.push_back(w.periodic_step);
    }

    std::vector<LayerResiduals> layers;
    layers.reserve(config.layers);
    layers.push_back(first_layer(train_windows, config.history, config.horizon));
    for (std::size_t l = 1; l < config.layers; ++l) layers.push_back(next_layer_residuals(layers.back(), steps, l, config));

    // The last layer's residuals are never needed for storage, but layer-1
    // candidate sets must still be non-empty for a one-layer bank.
    if (config.layers == 1)
        for (std::size_t j = 0; j < steps.size(); ++j)
            if (candidate_set(steps, steps[j], j, 1, config.tolerance, config.steps_per_period).empty())
                throw ComputationError("no layer-1 candidates for periodic step " + std::to_string(steps[j]) +
                                       " within tolerance " + std::to_string(config.tolerance));

    return MemoryBank(config, sensor_id, std::move(ids), std::move(steps), std::move(layers));
}

}  // namespace tsnn
