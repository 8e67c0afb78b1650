#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tsnn/dataset.hpp"
#include "tsnn/kernel.hpp"
#include "tsnn/matrix.hpp"

namespace tsnn {

struct ModelConfig {
    KernelConfig kernel;
    std::size_t layers = 10;
    std::size_t tolerance = 3;  // circular periodic-step tolerance at layer 1
    std::size_t steps_per_period = 288;
    std::size_t history = 12;   // T
    std::size_t horizon = 12;   // T'

    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Residual pairs of every bank entry at one layer, plus the scalar mean of
/// each historical residual (used by mean decoupling at layers >= 2).
struct LayerResiduals {
    RowMatrix x;
    RowMatrix y;
    std::vector<double> x_mean;

    std::size_t bytes() const noexcept { return x.bytes() + y.bytes(); }
    friend bool operator==(const LayerResiduals&, const LayerResiduals&) = default;
};

/// Read-only view of one entry across all layers.
struct BankEntry {
    std::size_t entry_id;
    std::size_t periodic_step;
    std::vector<std::span<const double>> x;  // x[l] is X^(l+1)
    std::vector<std::span<const double>> y;
};

/// Layered memory bank of one sensor. Immutable once constructed.
class MemoryBank {
public:
    MemoryBank(ModelConfig config, std::size_t sensor_id, std::vector<std::size_t> entry_ids,
               std::vector<std::size_t> periodic_steps, std::vector<LayerResiduals> layers);

    const ModelConfig& config() const noexcept { return config_; }
    std::size_t sensor_id() const noexcept { return sensor_id_; }
    std::size_t size() const noexcept { return entry_ids_.size(); }
    std::size_t num_layers() const noexcept { return layers_.size(); }

    std::size_t entry_id(std::size_t row) const { return entry_ids_.at(row); }
    std::size_t periodic_step(std::size_t row) const { return periodic_steps_.at(row); }
    std::span<const std::size_t> entry_ids() const noexcept { return entry_ids_; }
    std::span<const std::size_t> periodic_steps() const noexcept { return periodic_steps_; }

    /// Zero-based: layer(0) holds X^(1), Y^(1), the raw training windows.
    const LayerResiduals& layer(std::size_t index) const { return layers_.at(index); }
    BankEntry entry(std::size_t row) const;

    /// Bytes held by residual arrays across all layers.
    std::size_t residual_bytes() const noexcept;

    friend bool operator==(const MemoryBank&, const MemoryBank&) = default;

private:
    ModelConfig config_;
    std::size_t sensor_id_;
    std::vector<std::size_t> entry_ids_;
    std::vector<std::size_t> periodic_steps_;
    std::vector<LayerResiduals> layers_;
};

/// Distance between two periodic steps on a cycle of length period.
std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t period);

/// Rows matched at the given 1-based layer. Layer 1 keeps rows whose periodic
/// step lies within tolerance of the query's; deeper layers keep every row.
/// exclude_row removes the query itself when it is a bank entry.
std::vector<std::size_t> candidate_set(std::span<const std::size_t> periodic_steps, std::size_t query_periodic_step,
                                       std::optional<std::size_t> exclude_row, std::size_t layer,
                                       std::size_t tolerance, std::size_t period);
std::vector<std::size_t> candidate_set(const MemoryBank& bank, std::size_t query_periodic_step,
                                       std::optional<std::size_t> exclude_row, std::size_t layer);

double mean_of(std::span<const double> values);

/// Outcome of matching one residual input against one layer.
struct LayerMatch {
    ScoreSet scores;
    double input_mean = 0.0;          // 0 at layer 1
    std::vector<double> prediction;   // layer prediction, length T'
    std::vector<double> next_x;       // residual input to the next layer, length T
};

/// Scores x against the candidate rows of a layer and aggregates. With
/// mean_decoupled set, x and every candidate are centered on their own
/// historical mean before matching.
LayerMatch match_layer(std::span<const double> x, const LayerResiduals& layer, std::vector<std::size_t> candidates,
                       bool mean_decoupled, const KernelConfig& kernel);

/// Residuals of the next layer for every entry, leave-one-out. Throws
/// ComputationError when a layer-1 candidate set is empty.
LayerResiduals next_layer_residuals(const LayerResiduals& current, std::span<const std::size_t> periodic_steps,
                                    std::size_t layer, const ModelConfig& config);

/// Layer 1 of a bank: the raw windows as residual pairs.
LayerResiduals first_layer(std::span<const SeriesWindow> windows, std::size_t history, std::size_t horizon);

MemoryBank build_bank(std::span<const SeriesWindow> train_windows, const ModelConfig& config,
                      std::size_t sensor_id = 0);

inline constexpr std::uint32_t kBankFormatVersion = 1;

void save_bank(const MemoryBank& bank, const std::filesystem::path& path);
MemoryBank load_bank(const std::filesystem::path& path);

/// Exact size in bytes of a serialized bank.
std::size_t serialized_bank_size(std::size_t entries, std::size_t layers, std::size_t history, std::size_t horizon);

}  // namespace tsnn
