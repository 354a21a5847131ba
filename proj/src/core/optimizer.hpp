#pragma once

// Projected ADAM ascent of the sample criterion on the unit sphere.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/criterion.hpp"
#include "core/direction.hpp"

namespace rms {

enum class InitKind { RandomSphere, Provided, Warm };

struct OptimizerConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t n_starts = 8;
    InitKind init = InitKind::RandomSphere;
    // Provided: exactly one start. Warm: one start per entry.
    std::vector<std::vector<double>> init_points;
    // Project the ascent direction onto the tangent space before the update.
    bool tangent_projection = false;
    bool record_trace = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TracePoint {
    std::size_t start = 0;
    std::size_t epoch = 0;
    double q = 0.0;
    std::vector<double> theta;
};

struct OptResult {
    Direction theta_hat;
    double q_hat = 0.0;
    std::size_t start_index = 0;
    // Final criterion value of every start, in start order.
    std::vector<double> start_values;
    std::vector<TracePoint> trace;
    // Largest | ||theta|| - 1 | over every iterate.
    double max_norm_deviation = 0.0;
};

// Starting points implied by the config (dimension d).
std::vector<Direction> initial_points(const OptimizerConfig& config, std::size_t d);

// Single start, returns the final iterate. Trace entries are appended when
// config.record_trace is set.
OptResult ascend_from(const CriterionSpec& spec, const OptimizerConfig& config, const Direction& start,
                      std::size_t start_index);

OptResult projected_adam(const CriterionSpec& spec, const OptimizerConfig& config);

}  // namespace rms
