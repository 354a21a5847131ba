#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace rms {

enum class KernelFamily { GaussianProduct, EpanechnikovProduct, HigherOrderGaussianProduct };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// Product smoothing kernel K(u) = prod_m k(u_m) together with its bandwidth
// rule b_n = c * n^{-exponent}.
struct KernelSpec {
    KernelFamily family = KernelFamily::GaussianProduct;
    // Smoothness order s; only read for the higher-order family (even, >= 2).
    int order = 2;
    std::optional<double> bandwidth;
    double rule_constant = 1.0;
    // Defaults to 1 / (2s + 1).
    std::optional<double> rule_exponent;
    // Multiplies the exponent by 1.1.
    bool undersmooth = false;

    void validate() const;
    int smoothness_order() const;
    double resolve_bandwidth(std::size_t n) const;

    double univariate(double u) const;
    double product(std::span<const double> u) const;
    // Half-width of a box outside of which the kernel is negligible (or zero).
    double support_radius() const;
    bool compact() const { return family == KernelFamily::EpanechnikovProduct; }
};

// Order-2r Gaussian-based kernel: phi(u) * sum_{m<r} (-1)^m He_{2m}(u) / (2^m m!).
double higher_order_gaussian(double u, int order);
// Polynomial factor of the above without phi(u).
double higher_order_gaussian_poly(double u, int order);

double gaussian_density(double u);

}  // namespace rms
