#include <cmath>
#include <numbers>
#include <random>

#include "tsnn/error.hpp"
#include "tsnn/eval.hpp"

namespace tsnn {

RawSeries synthetic_series(const SyntheticSpec& spec) {
    if (spec.steps == 0 || spec.sensors == 0) throw UsageError("synthetic series needs steps and sensors");
    if (spec.noise_fraction < 0.0) throw UsageError("noise fraction must be non-negative");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = spec.noise_fraction * spec.amplitude;
    const double period = static_cast<double>(spec.steps_per_period);

    RowMatrix values(spec.steps, spec.sensors);
    for (std::size_t s = 0; s < spec.sensors; ++s) {
        const double phase = phase_dist(rng);
        for (std::size_t i = 0; i < spec.steps; ++i) {
            // Pattern depends on i only through i mod t, so it repeats exactly.
            const double p = static_cast<double>(i % spec.steps_per_period);
            const double angle = 2.0 * std::numbers::pi * p / period;
            const double pattern = spec.level + spec.amplitude * (std::sin(angle + phase) + 0.5 * std::sin(2.0 * angle));
            values(i, s) = pattern + (sigma > 0.0 ? sigma * noise(rng) : 0.0);
        }
    }
    return RawSeries(std::move(values), spec.steps_per_period, 0.0);
}

}  // namespace tsnn
