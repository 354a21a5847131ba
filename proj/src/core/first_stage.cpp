#include "core/first_stage.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rms {

std::string to_string(SeriesBasis basis) {
    return basis == SeriesBasis::Legendre ? "legendre" : "cubic_spline";
}

SeriesBasis series_basis_from_string(const std::string& name) {
    if (name == "legendre") return SeriesBasis::Legendre;
    if (name == "cubic_spline") return SeriesBasis::CubicSpline;
    throw ConfigError("unknown series basis '" + name + "'");
}

std::string to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::Kernel: return "kernel";
        case RegressorKind::Series: return "series";
        case RegressorKind::Mlp: return "mlp";
        case RegressorKind::KernelRidge: return "kernel_ridge";
    }
    return "unknown";
}

void SeriesSpec::validate() const {
    if (per_dim_degree == 0) throw ConfigError("series: per-dimension degree must be positive");
}

std::size_t SeriesSpec::total_dimension(std::size_t width) const {
    double k = std::pow(static_cast<double>(per_dim_degree), static_cast<double>(width));
    if (k > 1e7) throw ConfigError("series: tensor basis dimension is too large");
    return static_cast<std::size_t>(std::llround(k));
}

void KernelRidgeSpec::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("kernel ridge: alpha must be positive");
    if (!(gamma > 0.0)) throw ConfigError("kernel ridge: gamma must be positive");
    if (degree < 1) throw ConfigError("kernel ridge: degree must be at least 1");
    if (coef0 < 0.0) throw ConfigError("kernel ridge: coef0 must be nonnegative");
}

void univariate_basis(SeriesBasis basis, std::size_t count, double t, std::span<double> out) {
    if (basis == SeriesBasis::Legendre) {
        double p_prev = 1.0, p = t;
        for (std::size_t k = 0; k < count; ++k) {
            if (k == 0) {
                out[0] = 1.0;
            } else if (k == 1) {
                out[1] = t;
            } else {
                const double kk = static_cast<double>(k - 1);
                const double next = ((2.0 * kk + 1.0) * t * p - kk * p_prev) / (kk + 1.0);
                p_prev = p;
                p = next;
                out[k] = next;
            }
        }
        return;
    }
    // Cubic truncated-power spline with equally spaced interior knots.
    double power = 1.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(count, 4); ++k) {
        out[k] = power;
        power *= t;
    }
    if (count > 4) {
        const std::size_t knots = count - 4;
        for (std::size_t m = 1; m <= knots; ++m) {
            const double kappa = -1.0 + 2.0 * static_cast<double>(m) / static_cast<double>(knots + 1);
            const double r = t > kappa ? t - kappa : 0.0;
            out[3 + m] = r * r * r;
        }
    }
}

void series_basis_row(const SeriesSpec& spec, std::span<const double> t, std::span<double> out) {
    const std::size_t m = spec.per_dim_degree;
    std::vector<double> uni(m);
    std::size_t len = 1;
    out[0] = 1.0;
    // Kronecker expansion, last coordinate varies fastest.
    for (double tc : t) {
        univariate_basis(spec.univariate_basis, m, tc, uni);
        for (std::size_t a = len; a-- > 0;) {
            const double base = out[a];
            for (std::size_t b = 0; b < m; ++b) out[a * m + b] = base * uni[b];
        }
        len *= m;
    }
}

namespace {

void rescale(std::span<const double> x, std::span<const double> low, std::span<const double> high,
             std::span<double> t) {
    for (std::size_t k = 0; k < x.size(); ++k)
        t[k] = 2.0 * (x[k] - low[k]) / (high[k] - low[k]) - 1.0;
}

// Multi-indices with total degree <= p in `width` variables, with the
// weight that turns x^alpha into the polynomial-kernel feature map.
struct PolyFeature {
    std::vector<int> powers;
    double scale;
};

std::vector<PolyFeature> poly_features(std::size_t width, const KernelRidgeSpec& spec) {
    std::vector<PolyFeature> feats;
    std::vector<int> alpha(width, 0);
    const int p = spec.degree;
    auto factorial = [](int k) { return std::tgamma(k + 1.0); };
    auto binom = [&](int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); };
    // Enumerate all alpha with |alpha| <= p in lexicographic order.
    auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
        if (pos == width) {
            const int k = p - remaining;
            double multinom = factorial(k);
            for (int a : alpha) multinom /= factorial(a);
            const double w = binom(p, k) * std::pow(spec.coef0, p - k) * std::pow(spec.gamma, k) * multinom;
            feats.push_back({alpha, std::sqrt(w)});
            return;
        }
        for (int a = 0; a <= remaining; ++a) {
            alpha[pos] = a;
            self(self, pos + 1, remaining - a);
        }
        alpha[pos] = 0;
    };
    rec(rec, 0, p);
    return feats;
}

void poly_feature_row(const std::vector<PolyFeature>& feats, std::span<const double> x,
                      std::span<double> out) {
    for (std::size_t f = 0; f < feats.size(); ++f) {
        double v = feats[f].scale;
        for (std::size_t k = 0; k < x.size(); ++k)
            for (int r = 0; r < feats[f].powers[k]; ++r) v *= x[k];
        out[f] = v;
    }
}

double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

FittedRegressor::FittedRegressor(Model model, std::size_t width, double centering)
    : model_(std::move(model)), width_(width), centering_(centering) {}

RegressorKind FittedRegressor::kind() const {
    return static_cast<RegressorKind>(model_.index());
}

Prediction FittedRegressor::raw(std::span<const double> x) const {
    if (x.size() != width_) {
        std::ostringstream msg;
        msg << "predict: expected " << width_ << " covariates, got " << x.size();
        throw ConfigError(msg.str());
    }
    return std::visit(
        [&](const auto& m) -> Prediction {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KernelModel>) {
                const Dataset& tr = *m.train;
                const std::size_t w = tr.width();
                const double inv_b = 1.0 / m.bandwidth;
                const KernelSpec& ks = m.spec;
                double num = 0.0, den = 0.0;
                if (ks.family == KernelFamily::EpanechnikovProduct) {
                    for (std::size_t i = 0; i < tr.n; ++i) {
                        const double* r = tr.x.data() + i * w;
                        double k = 1.0;
                        for (std::size_t c = 0; c < w && k != 0.0; ++c) {
                            const double u = (r[c] - x[c]) * inv_b;
                            k *= std::abs(u) <= 1.0 ? 1.0 - u * u : 0.0;
                        }
                        num += k * tr.y_centered[i];
                        den += k;
                    }
                } else {
                    // Gaussian family: common normalizing constants cancel.
                    const bool higher = ks.family == KernelFamily::HigherOrderGaussianProduct;
                    for (std::size_t i = 0; i < tr.n; ++i) {
                        const double* r = tr.x.data() + i * w;
                        double s = 0.0, poly = 1.0;
                        for (std::size_t c = 0; c < w; ++c) {
                            const double u = (r[c] - x[c]) * inv_b;
                            s += u * u;
                            if (higher) poly *= higher_order_gaussian_poly(u, ks.order);
                        }
                        const double k = poly * std::exp(-0.5 * s);
                        num += k * tr.y_centered[i];
                        den += k;
                    }
                }
                if (!(den > 0.0) || !std::isfinite(num / den)) return {m.global_mean, true};
                return {num / den, false};
            } else if constexpr (std::is_same_v<T, SeriesModel>) {
                std::vector<double> t(x.size());
                rescale(x, m.low, m.high, t);
                std::vector<double> row(m.coef.size());
                series_basis_row(m.spec, t, row);
                double v = 0.0;
                for (std::size_t k = 0; k < row.size(); ++k) v += row[k] * m.coef[k];
                return {v, false};
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                return {m.net.forward(x), false};
            } else {
                const auto feats = poly_features(m.width, m.spec);
                std::vector<double> row(feats.size());
                poly_feature_row(feats, x, row);
                double v = 0.0;
                for (std::size_t k = 0; k < row.size(); ++k) v += row[k] * m.coef[k];
                return {v, false};
            }
        },
        model_);
}

double FittedRegressor::predict_raw(std::span<const double> x) const { return raw(x).value; }

Prediction FittedRegressor::predict_detail(std::span<const double> x) const {
    Prediction p = raw(x);
    p.value = std::clamp(p.value, clamp_low(), clamp_high());
    return p;
}

std::vector<double> FittedRegressor::predict_all(const Dataset& data) const {
    std::vector<double> out(data.n);
    for (std::size_t i = 0; i < data.n; ++i) out[i] = predict(data.row(i));
    return out;
}

FittedRegressor fit_kernel(std::shared_ptr<const Dataset> data, const KernelSpec& spec) {
    data->validate();
    if (data->n < 1) throw ConfigError("kernel: need at least one observation");
    KernelModel m;
    m.spec = spec;
    m.bandwidth = spec.resolve_bandwidth(data->n);
    m.global_mean = mean(data->y_centered);
    const std::size_t w = data->width();
    const double c = data->centering;
    m.train = std::move(data);
    return FittedRegressor(std::move(m), w, c);
}

FittedRegressor fit_kernel(const Dataset& data, const KernelSpec& spec) {
    return fit_kernel(std::make_shared<const Dataset>(data), spec);
}

FittedRegressor fit_series(const Dataset& data, const SeriesSpec& spec) {
    data.validate();
    spec.validate();
    const std::size_t w = data.width();
    const std::size_t K = spec.total_dimension(w);
    if (K >= data.n) {
        std::ostringstream msg;
        msg << "series: basis dimension " << K << " must be below n = " << data.n;
        throw ConfigError(msg.str());
    }
    Eigen::MatrixXd design(static_cast<Eigen::Index>(data.n), static_cast<Eigen::Index>(K));
    std::vector<double> t(w), row(K);
    for (std::size_t i = 0; i < data.n; ++i) {
        rescale(data.row(i), data.support_low, data.support_high, t);
        series_basis_row(spec, t, row);
        for (std::size_t k = 0; k < K; ++k) design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    Eigen::Map<const Eigen::VectorXd> y(data.y_centered.data(), static_cast<Eigen::Index>(data.n));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < K) {
        std::ostringstream msg;
        msg << "series: design matrix is rank deficient, " << (K - rank) << " of " << K
            << " columns are deficient";
        throw RankDeficientError(msg.str(), K - rank);
    }
    const Eigen::VectorXd beta = qr.solve(y);
    SeriesModel m;
    m.spec = spec;
    m.low = data.support_low;
    m.high = data.support_high;
    m.coef.assign(beta.data(), beta.data() + beta.size());
    return FittedRegressor(std::move(m), w, data.centering);
}

FittedRegressor fit_mlp(const Dataset& data, const MlpSpec& spec) {
    data.validate();
    spec.validate();
    if (data.n == 0) throw ConfigError("mlp: empty dataset");
    Rng rng(spec.seed);
    MlpModel m;
    m.spec = spec;
    m.net = Mlp(data.width(), spec.hidden_width, spec.hidden_layers);
    m.net.init_he_uniform(rng);

    const std::size_t n = data.n;
    const std::size_t batch = (spec.batch == 0 || spec.batch >= n) ? n : spec.batch;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(m.net.param_count());
    Adam adam(m.net.param_count(), spec.learning_rate);
    Mlp::Tape tape = m.net.make_tape();

    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        if (batch < n) {
            for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
        }
        double loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const double scale = 2.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                const double r = m.net.forward(data.row(i), tape) - data.y_centered[i];
                loss += r * r;
                m.net.backward(tape, scale * r, grad);
            }
            adam.step(m.net.params(), grad);
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss)) {
            std::ostringstream msg;
            msg << "mlp: non-finite training loss at epoch " << epoch << " (loss " << loss << ")";
            throw NumericalError(msg.str());
        }
        m.loss_history.push_back(loss);
    }
    const std::size_t w = data.width();
    return FittedRegressor(std::move(m), w, data.centering);
}

FittedRegressor fit_kernel_ridge(const Dataset& data, const KernelRidgeSpec& spec) {
    data.validate();
    spec.validate();
    const std::size_t w = data.width();
    const auto feats = poly_features(w, spec);
    const auto F = static_cast<Eigen::Index>(feats.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(F, F);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(F);
    Eigen::VectorXd row(F);
    for (std::size_t i = 0; i < data.n; ++i) {
        poly_feature_row(feats, data.row(i), std::span<double>(row.data(), feats.size()));
        gram.selfadjointView<Eigen::Lower>().rankUpdate(row);
        rhs += data.y_centered[i] * row;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += spec.alpha;
    const Eigen::VectorXd beta = gram.ldlt().solve(rhs);
    if (!beta.allFinite()) throw NumericalError("kernel ridge: solve produced non-finite coefficients");
    KernelRidgeModel m;
    m.spec = spec;
    m.width = w;
    m.coef.assign(beta.data(), beta.data() + beta.size());
    return FittedRegressor(std::move(m), w, data.centering);
}

}  // namespace rms
