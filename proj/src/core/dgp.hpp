#pragma once

// Simulation designs: a single-index logit and a two-index product-of-logits
// binary choice model, both with Unif[low, high] covariates.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/direction.hpp"

namespace rms {

enum class Design { SingleIndex, TwoIndex };

std::string to_string(Design design);
Design design_from_string(const std::string& name);
std::size_t index_count(Design design);

// Centering constant c_J = 2^{-J}; y - c_J has conditional mean zero on the
// boundary where every index vanishes.
double centering_for(std::size_t J);

struct DgpSpec {
    Design design = Design::SingleIndex;
    std::size_t n = 1000;
    std::vector<double> theta0;
    std::size_t d = 3;
    double covariate_low = -2.0;
    double covariate_high = 2.0;
    std::uint64_t seed = 0;

    // Throws ConfigError on a broken invariant.
    void validate() const;
    Direction theta() const;
};

// (sqrt(3)/3, -sqrt(3)/3, sqrt(3)/3), normalized in double precision.
std::vector<double> default_theta0();

struct Dataset {
    std::size_t n = 0;
    std::size_t J = 1;
    std::size_t d = 0;
    // Row-major n x (J*d): row i holds X_{i1}, ..., X_{iJ}.
    std::vector<double> x;
    std::vector<double> y_centered;
    double centering = 0.5;
    // Per flattened coordinate support bounds, used by the series basis.
    std::vector<double> support_low;
    std::vector<double> support_high;

    std::size_t width() const noexcept { return J * d; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(x).subspan(i * width(), width());
    }
    // Throws ConfigError when shapes disagree.
    void validate() const;
};

// Build a dataset from raw 0/1 outcomes; support bounds from sample min/max.
Dataset make_dataset(std::size_t J, std::size_t d, std::vector<double> x,
                     std::span<const double> y_raw);

double logistic_cdf(double t);
double logistic_density(double t);
// Inverse CDF, u in (0,1).
double logistic_quantile(double u);

Dataset gen_single_index(const DgpSpec& spec);
Dataset gen_two_index(const DgpSpec& spec);
Dataset generate(const DgpSpec& spec);

// Closed-form h0(x) = E[y - c_J | X = x] for the logistic designs.
double true_h0(Design design, std::span<const double> x_block, const Direction& theta0);

}  // namespace rms
