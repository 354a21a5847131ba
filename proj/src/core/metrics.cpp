#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace rms {

double median(std::vector<double> v) {
    if (v.empty()) throw ConfigError("median of an empty list");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

MetricBlock compute_metrics(const std::vector<std::vector<double>>& estimates, const Direction& theta0) {
    if (estimates.empty()) throw ConfigError("compute_metrics: no estimates");
    const std::size_t d = theta0.dim();
    const std::size_t B = estimates.size();
    const double Bd = static_cast<double>(B);
    MetricBlock m;
    m.count = B;
    m.mse.assign(d, 0.0);
    m.bias.assign(d, 0.0);
    m.sd.assign(d, 0.0);
    m.l1_error.assign(d, 0.0);
    std::vector<double> mean(d, 0.0), ang;
    ang.reserve(B);
    for (const auto& e : estimates) {
        if (e.size() != d) throw ConfigError("compute_metrics: estimate has wrong dimension");
        double c = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double err = e[k] - theta0[k];
            mean[k] += e[k];
            m.mse[k] += err * err;
            m.l1_error[k] += std::abs(err);
            c += e[k] * theta0[k];
        }
        ang.push_back(1.0 - c);
    }
    double bias2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        mean[k] /= Bd;
        m.mse[k] /= Bd;
        m.l1_error[k] /= Bd;
        m.bias[k] = mean[k] - theta0[k];
        bias2 += m.bias[k] * m.bias[k];
        if (B > 1) {
            double ss = 0.0;
            for (const auto& e : estimates) ss += (e[k] - mean[k]) * (e[k] - mean[k]);
            m.sd[k] = std::sqrt(ss / (Bd - 1.0));
        }
    }
    m.sd_defined = B > 1;
    m.l2_norm_bias = std::sqrt(bias2);
    double s = 0.0;
    for (double a : ang) s += a;
    m.one_minus_mean_ang = s / Bd;
    m.one_minus_median_ang = median(ang);
    return m;
}

}  // namespace rms
