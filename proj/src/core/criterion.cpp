#include "core/criterion.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/first_stage.hpp"

namespace rms {

IndexAggregate aggregate_indexes(std::span<const double> theta, std::span<const double> x_block,
                                 std::size_t J) {
    const std::size_t d = theta.size();
    IndexAggregate a;
    for (std::size_t j = 0; j < J; ++j) {
        double s = 0.0;
        const double* xj = x_block.data() + j * d;
        for (std::size_t k = 0; k < d; ++k) s += xj[k] * theta[k];
        const double neg = relu(-s);
        const double pos = relu(s);
        if (j == 0 || neg < a.u) {
            a.u = neg;
            a.u_arg = j;
            a.s_u = s;
        }
        if (j == 0 || pos < a.v) {
            a.v = pos;
            a.v_arg = j;
            a.s_v = s;
        }
    }
    return a;
}

double g_plus(std::span<const double> theta, double h_val, std::span<const double> x_block,
              std::size_t J) {
    return relu(h_val - aggregate_indexes(theta, x_block, J).u);
}

double g_minus(std::span<const double> theta, double h_val, std::span<const double> x_block,
               std::size_t J) {
    return relu(-h_val - aggregate_indexes(theta, x_block, J).v);
}

CriterionSpec::CriterionSpec(const Dataset& data, std::vector<double> h_values)
    : data_(&data), h_(std::move(h_values)) {
    data.validate();
    if (h_.size() != data.n) throw ConfigError("criterion: h values do not match sample size");
}

CriterionSpec CriterionSpec::from_regressor(const Dataset& data, const FittedRegressor& h) {
    if (h.input_dim() != data.width()) throw ConfigError("criterion: regressor dimension mismatch");
    return CriterionSpec(data, h.predict_all(data));
}

CriterionSpec CriterionSpec::from_oracle(const Dataset& data, Design design, const Direction& theta0) {
    if (index_count(design) != data.J || theta0.dim() != data.d)
        throw ConfigError("criterion: oracle design does not match data shape");
    std::vector<double> h(data.n);
    for (std::size_t i = 0; i < data.n; ++i) h[i] = true_h0(design, data.row(i), theta0);
    return CriterionSpec(data, std::move(h));
}

double CriterionSpec::mean_abs_h() const {
    double s = 0.0;
    for (double v : h_) s += std::abs(v);
    return h_.empty() ? 0.0 : s / static_cast<double>(h_.size());
}

namespace {

void check_theta(const CriterionSpec& spec, std::span<const double> theta) {
    if (theta.size() != spec.d()) {
        std::ostringstream msg;
        msg << "criterion: theta has " << theta.size() << " components, expected " << spec.d();
        throw ConfigError(msg.str());
    }
}

}  // namespace

CriterionValue sample_criterion(const CriterionSpec& spec, std::span<const double> theta) {
    check_theta(spec, theta);
    const Dataset& data = spec.data();
    const auto h = spec.h_values();
    double qp = 0.0, qm = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const IndexAggregate a = aggregate_indexes(theta, data.row(i), data.J);
        qp += relu(h[i] - a.u);
        qm += relu(-h[i] - a.v);
    }
    const double inv_n = 1.0 / static_cast<double>(data.n);
    CriterionValue out;
    out.q_plus = qp * inv_n;
    out.q_minus = qm * inv_n;
    out.q = out.q_plus + out.q_minus;
    return out;
}

CriterionValue criterion_with_subgradient(const CriterionSpec& spec, std::span<const double> theta,
                                          std::span<double> grad) {
    check_theta(spec, theta);
    const Dataset& data = spec.data();
    const std::size_t d = data.d;
    const auto h = spec.h_values();
    std::fill(grad.begin(), grad.end(), 0.0);
    double qp = 0.0, qm = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto row = data.row(i);
        const IndexAggregate a = aggregate_indexes(theta, row, data.J);
        const double plus_arg = h[i] - a.u;
        const double minus_arg = -h[i] - a.v;
        if (plus_arg > 0.0) {
            qp += plus_arg;
            // d/dtheta of -[-s]_+ is +x when -s > 0.
            if (-a.s_u > 0.0) {
                const double* xj = row.data() + a.u_arg * d;
                for (std::size_t k = 0; k < d; ++k) grad[k] += xj[k];
            }
        }
        if (minus_arg > 0.0) {
            qm += minus_arg;
            if (a.s_v > 0.0) {
                const double* xj = row.data() + a.v_arg * d;
                for (std::size_t k = 0; k < d; ++k) grad[k] -= xj[k];
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(data.n);
    for (double& g : grad) g *= inv_n;
    CriterionValue out;
    out.q_plus = qp * inv_n;
    out.q_minus = qm * inv_n;
    out.q = out.q_plus + out.q_minus;
    return out;
}

std::vector<double> criterion_subgradient(const CriterionSpec& spec, std::span<const double> theta) {
    std::vector<double> g(spec.d());
    criterion_with_subgradient(spec, theta, g);
    return g;
}

}  // namespace rms
