#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsnn/matrix.hpp"

namespace tsnn {

enum class Scaling { Exponential = 0, Complement = 1, InverseSquare = 2, Sigmoid = 3 };

std::string to_string(Scaling s);
Scaling scaling_from_string(const std::string& name);  // exp | complement | invsq | sigmoid

struct KernelConfig {
    double gamma = 10.0;
    double beta = 1.5;
    Scaling scaling = Scaling::Exponential;
    double epsilon = 1e-5;  // InverseSquare
    double mu = 0.5;        // Sigmoid
    // When false, distances are fed to the Exponential scaling without min-max
    // normalization, as exp(-gamma * d^beta). With gamma = 1/(2 sigma^2) and
    // beta = 2 this is the Gaussian kernel.
    bool minmax_normalize = true;

    void validate() const;
    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// Similarity scores of one query against a candidate set.
struct ScoreSet {
    std::vector<std::size_t> candidates;  // row indices into the scored matrix
    std::vector<double> raw;              // after scaling, before normalization
    std::vector<double> normalized;       // raw / sum(raw)
};

/// Euclidean distance from x to every row of candidates.
std::vector<double> distances(std::span<const double> x, const RowMatrix& candidates);

/// Euclidean distance between (a - a_offset) and (b - b_offset); the offsets
/// are scalars subtracted element-wise.
double centered_distance(std::span<const double> a, double a_offset, std::span<const double> b, double b_offset);

/// (d - min) / (max - min); all zeros when max == min.
std::vector<double> normalize_distances(std::span<const double> d);

/// Applies the configured scaling. Exponential and Complement expect
/// min-max-normalized input in [0, 1] unless minmax_normalize is off;
/// InverseSquare and Sigmoid expect raw distances.
std::vector<double> scale_scores(std::span<const double> d, const KernelConfig& config);

/// raw / sum(raw). Throws ComputationError when the sum is not positive.
std::vector<double> normalize_scores(std::span<const double> raw);

/// Full scoring pipeline from raw distances: normalization (if enabled and the
/// scaling consumes it), scaling, score normalization.
ScoreSet scores_from_distances(std::vector<std::size_t> candidates, std::span<const double> d,
                               const KernelConfig& config);

/// Gaussian-kernel Nadaraya-Watson estimate. Reference estimator used to
/// cross-check the scoring pipeline.
std::vector<double> nadaraya_watson(std::span<const double> x, const RowMatrix& candidates_x,
                                    const RowMatrix& candidates_y, double sigma);

}  // namespace tsnn
