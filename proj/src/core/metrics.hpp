#pragma once

#include <cstddef>
#include <vector>

#include "core/direction.hpp"

namespace rms {

// Monte Carlo summary of a set of direction estimates against theta0.
// SD uses the (B-1) denominator, so mse_k = bias_k^2 + (B-1)/B * sd_k^2.
struct MetricBlock {
    std::vector<double> mse;
    std::vector<double> bias;
    std::vector<double> sd;
    std::vector<double> l1_error;  // mean |theta_hat_k - theta0_k|
    double l2_norm_bias = 0.0;
    double one_minus_mean_ang = 0.0;
    double one_minus_median_ang = 0.0;
    // False when B = 1; sd is then reported as 0.
    bool sd_defined = true;
    std::size_t count = 0;

    bool operator==(const MetricBlock&) const = default;
};

MetricBlock compute_metrics(const std::vector<std::vector<double>>& estimates, const Direction& theta0);

double median(std::vector<double> values);

}  // namespace rms
