#pragma once

// Independent reference computations for the test suites and the acceptance
// binary. Nothing here calls the code path it is used to check.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/criterion.hpp"
#include "core/dgp.hpp"
#include "core/direction.hpp"
#include "core/hyperplane.hpp"
#include "core/rng.hpp"

namespace rms::oracle {

// Thin-slab Monte Carlo estimate of a hyperplane integral:
//   (1/(2 delta)) * E_box[m(x) 1{|x'theta - t| < delta}] * vol(box).
struct SlabEstimate {
    std::vector<double> value;
    std::vector<double> std_error;
};

SlabEstimate slab_integral(const SurfaceIntegrand& m, std::size_t out_dim, const Direction& theta, double t,
                           const Box& box, std::size_t draws, std::uint64_t seed, double delta = 1e-3);

// Uniform covariates on [-2,2] with arbitrary centered outcomes in [-0.5,0.5].
Dataset random_dataset(Rng& rng, std::size_t n, std::size_t J, std::size_t d);
std::vector<double> random_direction(Rng& rng, std::size_t d);

// Smallest distance of any observation to a kink of the criterion in theta:
// zero indexes, ties inside the inner minima, and the outer ReLU arguments.
double kink_margin(std::span<const double> h, const Dataset& data, std::span<const double> theta);

// Direct single-index evaluation of the criterion terms, written from the
// defining formulas without the J-index aggregation.
double direct_g_plus(double h, std::span<const double> x, std::span<const double> theta);
double direct_g_minus(double h, std::span<const double> x, std::span<const double> theta);

struct FdReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// Criterion subgradient against central differences (step 1e-6) on random
// configurations whose kink margins all exceed 1e-3.
FdReport subgradient_suite(std::size_t configs, std::uint64_t seed);

// Loss gradient of an RMS network (every MLP parameter and theta) against
// central differences (step 1e-5) on a 5-point toy sample.
FdReport network_gradient_check(std::size_t J, std::uint64_t seed);

// Plain MLP squared-error gradient against central differences, 5-point toy sample.
FdReport mlp_gradient_check(std::uint64_t seed);

struct BoundReport {
    double max_excess = 0.0;        // max of Q(theta) - mean|h|, should be <= 0
    double max_equality_gap = 0.0;  // max |Q(theta0) - mean|h0|| under the oracle
    double min_q = 0.0;
    std::size_t draws = 0;
};

BoundReport criterion_bound_suite(std::size_t draws, std::uint64_t seed);

// Elementwise relative error with a floor for entries that are both ~0.
double relative_error(double a, double b, double floor = 1e-8);

}  // namespace rms::oracle
