#include "core/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rms {

std::string to_string(Design design) {
    return design == Design::SingleIndex ? "single_index" : "two_index";
}

Design design_from_string(const std::string& name) {
    if (name == "single_index" || name == "SingleIndex") return Design::SingleIndex;
    if (name == "two_index" || name == "TwoIndex") return Design::TwoIndex;
    throw ConfigError("unknown design '" + name + "'");
}

std::size_t index_count(Design design) { return design == Design::SingleIndex ? 1 : 2; }

double centering_for(std::size_t J) { return std::ldexp(1.0, -static_cast<int>(J)); }

std::vector<double> default_theta0() {
    const double a = std::sqrt(3.0) / 3.0;
    std::vector<double> v{a, -a, a};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (double& x : v) x /= n;
    return v;
}

void DgpSpec::validate() const {
    if (n == 0) throw ConfigError("dgp: n must be positive");
    if (d == 0) throw ConfigError("dgp: d must be positive");
    if (theta0.size() != d) {
        std::ostringstream msg;
        msg << "dgp: theta0 has " << theta0.size() << " components but d = " << d;
        throw ConfigError(msg.str());
    }
    if (!(covariate_low < covariate_high))
        throw ConfigError("dgp: covariate_low must be below covariate_high");
    const double nrm = norm2(theta0);
    if (std::abs(nrm - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "dgp: theta0 must have unit norm, got " << nrm;
        throw ConfigError(msg.str());
    }
}

Direction DgpSpec::theta() const { return normalize(theta0); }

void Dataset::validate() const {
    if (J == 0 || d == 0) throw ConfigError("dataset: J and d must be positive");
    if (x.size() != n * J * d) throw ConfigError("dataset: covariate block has wrong size");
    if (y_centered.size() != n) throw ConfigError("dataset: response length differs from n");
    if (support_low.size() != J * d || support_high.size() != J * d)
        throw ConfigError("dataset: support bounds have wrong size");
}

Dataset make_dataset(std::size_t J, std::size_t d, std::vector<double> x,
                     std::span<const double> y_raw) {
    Dataset ds;
    ds.J = J;
    ds.d = d;
    ds.n = y_raw.size();
    if (J * d == 0 || x.size() != ds.n * J * d)
        throw ConfigError("dataset: covariate count does not match n * J * d");
    ds.x = std::move(x);
    ds.centering = centering_for(J);
    ds.y_centered.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (y_raw[i] != 0.0 && y_raw[i] != 1.0)
            throw ConfigError("dataset: outcomes must be 0 or 1");
        ds.y_centered[i] = y_raw[i] - ds.centering;
    }
    const std::size_t w = J * d;
    ds.support_low.assign(w, 0.0);
    ds.support_high.assign(w, 0.0);
    for (std::size_t k = 0; k < w; ++k) {
        double lo = INFINITY, hi = -INFINITY;
        for (std::size_t i = 0; i < ds.n; ++i) {
            lo = std::min(lo, ds.x[i * w + k]);
            hi = std::max(hi, ds.x[i * w + k]);
        }
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        ds.support_low[k] = lo;
        ds.support_high[k] = hi;
    }
    return ds;
}

double logistic_cdf(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double logistic_density(double t) {
    const double f = logistic_cdf(t);
    return f * (1.0 - f);
}

double logistic_quantile(double u) { return std::log(u / (1.0 - u)); }

namespace {

Dataset generate_impl(const DgpSpec& spec, std::size_t J) {
    spec.validate();
    const Direction theta = spec.theta();
    Rng rng(spec.seed);
    Dataset ds;
    ds.n = spec.n;
    ds.J = J;
    ds.d = spec.d;
    ds.centering = centering_for(J);
    const std::size_t w = J * spec.d;
    ds.x.resize(spec.n * w);
    ds.y_centered.resize(spec.n);
    ds.support_low.assign(w, spec.covariate_low);
    ds.support_high.assign(w, spec.covariate_high);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double* row = ds.x.data() + i * w;
        for (std::size_t k = 0; k < w; ++k)
            row[k] = rng.uniform(spec.covariate_low, spec.covariate_high);
        bool y = true;
        for (std::size_t j = 0; j < J; ++j) {
            const double index = dot(std::span<const double>(row + j * spec.d, spec.d),
                                     theta.values());
            const double eps = logistic_quantile(rng.uniform_open());
            y = y && (index > eps);
        }
        ds.y_centered[i] = (y ? 1.0 : 0.0) - ds.centering;
    }
    return ds;
}

}  // namespace

Dataset gen_single_index(const DgpSpec& spec) {
    if (spec.design != Design::SingleIndex)
        throw ConfigError("gen_single_index: spec.design must be single_index");
    return generate_impl(spec, 1);
}

Dataset gen_two_index(const DgpSpec& spec) {
    if (spec.design != Design::TwoIndex)
        throw ConfigError("gen_two_index: spec.design must be two_index");
    return generate_impl(spec, 2);
}

Dataset generate(const DgpSpec& spec) {
    return spec.design == Design::SingleIndex ? gen_single_index(spec) : gen_two_index(spec);
}

double true_h0(Design design, std::span<const double> x_block, const Direction& theta0) {
    const std::size_t J = index_count(design);
    const std::size_t d = theta0.dim();
    if (x_block.size() != J * d) throw ConfigError("true_h0: covariate block has wrong size");
    double p = 1.0;
    for (std::size_t j = 0; j < J; ++j)
        p *= logistic_cdf(dot(x_block.subspan(j * d, d), theta0.values()));
    return p - centering_for(J);
}

}  // namespace rms
