#pragma once

// Sample RMS criterion for J-index sign alignment:
//   g+(x) = [h(x) - min_j [-x_j'theta]_+]_+
//   g-(x) = [-h(x) - min_j [x_j'theta]_+]_+
//   Q(theta) = mean_i (g+(X_i) + g-(X_i)).

#include <cstddef>
#include <span>
#include <vector>

#include "core/dgp.hpp"
#include "core/direction.hpp"

namespace rms {

class FittedRegressor;

inline double relu(double t) { return t > 0.0 ? t : 0.0; }

// Inner aggregates of the MISC layer for one observation.
struct IndexAggregate {
    double u = 0.0;          // min_j [-s_j]_+
    double v = 0.0;          // min_j [s_j]_+
    std::size_t u_arg = 0;   // lowest argmin for u
    std::size_t v_arg = 0;   // lowest argmin for v
    double s_u = 0.0;        // s_{u_arg}
    double s_v = 0.0;        // s_{v_arg}
};

IndexAggregate aggregate_indexes(std::span<const double> theta, std::span<const double> x_block,
                                 std::size_t J);

double g_plus(std::span<const double> theta, double h_val, std::span<const double> x_block,
              std::size_t J);
double g_minus(std::span<const double> theta, double h_val, std::span<const double> x_block,
               std::size_t J);

struct CriterionValue {
    double q = 0.0;
    double q_plus = 0.0;
    double q_minus = 0.0;
};

// Binds a dataset to the first-stage values h(X_i), evaluated once.
class CriterionSpec {
public:
    CriterionSpec(const Dataset& data, std::vector<double> h_values);

    static CriterionSpec from_regressor(const Dataset& data, const FittedRegressor& h);
    static CriterionSpec from_oracle(const Dataset& data, Design design, const Direction& theta0);

    const Dataset& data() const noexcept { return *data_; }
    std::span<const double> h_values() const noexcept { return h_; }
    std::size_t J() const noexcept { return data_->J; }
    std::size_t d() const noexcept { return data_->d; }
    // (1/n) sum |h(X_i)|, the upper bound of Q.
    double mean_abs_h() const;

private:
    const Dataset* data_;
    std::vector<double> h_;
};

CriterionValue sample_criterion(const CriterionSpec& spec, std::span<const double> theta);
inline CriterionValue sample_criterion(const CriterionSpec& spec, const Direction& theta) {
    return sample_criterion(spec, theta.values());
}

// Ascent subgradient of Q at theta. ReLU derivatives are 0 at their kinks and
// ties in the inner minimum go to the lowest index.
std::vector<double> criterion_subgradient(const CriterionSpec& spec, std::span<const double> theta);

// Value and subgradient in one pass.
CriterionValue criterion_with_subgradient(const CriterionSpec& spec, std::span<const double> theta,
                                          std::span<double> grad);

}  // namespace rms
