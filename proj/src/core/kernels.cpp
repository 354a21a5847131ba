#include "core/kernels.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace rms {

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::GaussianProduct: return "gaussian";
        case KernelFamily::EpanechnikovProduct: return "epanechnikov";
        case KernelFamily::HigherOrderGaussianProduct: return "higher_order_gaussian";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian") return KernelFamily::GaussianProduct;
    if (name == "epanechnikov") return KernelFamily::EpanechnikovProduct;
    if (name == "higher_order_gaussian") return KernelFamily::HigherOrderGaussianProduct;
    throw ConfigError("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
    if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("kernel: bandwidth must be positive");
    if (!(rule_constant > 0.0)) throw ConfigError("kernel: rule constant must be positive");
    if (rule_exponent && !(*rule_exponent > 0.0))
        throw ConfigError("kernel: rule exponent must be positive");
    if (family == KernelFamily::HigherOrderGaussianProduct && (order < 2 || order % 2 != 0))
        throw ConfigError("kernel: higher-order family needs an even order >= 2");
}

int KernelSpec::smoothness_order() const {
    return family == KernelFamily::HigherOrderGaussianProduct ? order : 2;
}

double KernelSpec::resolve_bandwidth(std::size_t n) const {
    validate();
    if (bandwidth) return *bandwidth;
    if (n == 0) throw ConfigError("kernel: cannot resolve bandwidth for n = 0");
    double exponent = rule_exponent.value_or(1.0 / (2.0 * smoothness_order() + 1.0));
    if (undersmooth) exponent *= 1.1;
    return rule_constant * std::pow(static_cast<double>(n), -exponent);
}

double gaussian_density(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

double higher_order_gaussian_poly(double u, int order) {
    // Probabilists' Hermite polynomials by recurrence.
    const int r = order / 2;
    double he_prev = 1.0;  // He_0
    double he = u;         // He_1
    double sum = 1.0;
    double coef = 1.0;
    for (int k = 1; k < 2 * r - 1; ++k) {
        const double next = u * he - k * he_prev;  // He_{k+1}
        he_prev = he;
        he = next;
        if ((k + 1) % 2 == 0) {
            const int m = (k + 1) / 2;
            coef *= -1.0 / (2.0 * m);
            sum += coef * he;
        }
    }
    return sum;
}

double higher_order_gaussian(double u, int order) {
    return higher_order_gaussian_poly(u, order) * gaussian_density(u);
}

double KernelSpec::univariate(double u) const {
    switch (family) {
        case KernelFamily::GaussianProduct: return gaussian_density(u);
        case KernelFamily::EpanechnikovProduct: return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
        case KernelFamily::HigherOrderGaussianProduct: return higher_order_gaussian(u, order);
    }
    return 0.0;
}

double KernelSpec::product(std::span<const double> u) const {
    double k = 1.0;
    for (double v : u) k *= univariate(v);
    return k;
}

double KernelSpec::support_radius() const {
    switch (family) {
        case KernelFamily::EpanechnikovProduct: return 1.0;
        case KernelFamily::GaussianProduct: return 9.0;
        case KernelFamily::HigherOrderGaussianProduct: return 10.0;
    }
    return 9.0;
}

}  // namespace rms
