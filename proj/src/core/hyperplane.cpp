#include "core/hyperplane.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/quadrature.hpp"
#include "core/rng.hpp"

namespace rms {

CoordFrame orthonormal_complement(const Direction& theta) {
    const auto d = static_cast<Eigen::Index>(theta.dim());
    Eigen::Map<const Eigen::VectorXd> th(theta.values().data(), d);
    // Stable reflector: H theta = -sign(theta_1) e_1, so H e_1 = -sign(theta_1) theta.
    const double sgn = th(0) >= 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd v = th;
    v(0) += sgn;
    const double vv = v.squaredNorm();
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(d, d) - (2.0 / vv) * v * v.transpose();
    T.col(0) *= -sgn;
    // Column 1 is theta up to rounding; store it exactly.
    T.col(0) = th;
    return {theta, T};
}

Box Box::cube(std::size_t d, double low, double high) {
    return {std::vector<double>(d, low), std::vector<double>(d, high)};
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t k = 0; k < low.size(); ++k) v *= high[k] - low[k];
    return v;
}

bool Box::contains(std::span<const double> x, double tol) const {
    for (std::size_t k = 0; k < low.size(); ++k)
        if (x[k] < low[k] - tol || x[k] > high[k] + tol) return false;
    return true;
}

namespace {

constexpr double kZero = 1e-14;

// Nested Gauss-Legendre over the convex polygon/polytope {u : low <= c + A u <= high}.
// Each level integrates one coordinate of u, split at the projections of the
// polytope vertices so that every piece has a smooth integrand.
class SliceQuadrature {
public:
    SliceQuadrature(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Box& box,
                    const SurfaceIntegrand& m, std::size_t out_dim, std::size_t nodes)
        : A_(A), c_(c), box_(box), m_(m), rule_(gauss_legendre(nodes)), acc_(out_dim, 0.0),
          tmp_(out_dim), x_(static_cast<std::size_t>(A.rows())), u_(static_cast<std::size_t>(A.cols())) {}

    SurfaceIntegral run() {
        recurse(0, 1.0);
        return {acc_, std::vector<double>(acc_.size(), 0.0), evals_, false};
    }

private:
    // Residual bounds lo' <= A[:, k:] u[k:] <= hi' given u[0:k].
    void residual_bounds(std::size_t k, std::vector<double>& lo, std::vector<double>& hi) const {
        const auto d = static_cast<std::size_t>(A_.rows());
        lo.resize(d);
        hi.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            double shift = c_(static_cast<Eigen::Index>(i));
            for (std::size_t l = 0; l < k; ++l) shift += A_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * u_[l];
            lo[i] = box_.low[i] - shift;
            hi[i] = box_.high[i] - shift;
        }
    }

    // Candidate breakpoints for u[k]; empty when the section is empty.
    std::vector<double> breakpoints(std::size_t k) const {
        const auto d = static_cast<std::size_t>(A_.rows());
        const std::size_t r = static_cast<std::size_t>(A_.cols()) - k;
        std::vector<double> lo, hi, pts;
        residual_bounds(k, lo, hi);
        auto a = [&](std::size_t i, std::size_t l) {
            return A_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + l));
        };
        auto feasible = [&](const Eigen::VectorXd& u) {
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t l = 0; l < r; ++l) s += a(i, l) * u(static_cast<Eigen::Index>(l));
                const double tol = 1e-10 * (1.0 + std::abs(lo[i]) + std::abs(hi[i]));
                if (s < lo[i] - tol || s > hi[i] + tol) return false;
            }
            return true;
        };
        if (r == 1) {
            double lower = -INFINITY, upper = INFINITY;
            for (std::size_t i = 0; i < d; ++i) {
                const double ai = a(i, 0);
                if (std::abs(ai) <= kZero) {
                    const double tol = 1e-10 * (1.0 + std::abs(lo[i]) + std::abs(hi[i]));
                    if (lo[i] > tol || hi[i] < -tol) return {};
                    continue;
                }
                double p = lo[i] / ai, q = hi[i] / ai;
                if (p > q) std::swap(p, q);
                lower = std::max(lower, p);
                upper = std::min(upper, q);
            }
            if (!(upper > lower) || !std::isfinite(lower) || !std::isfinite(upper)) return {};
            return {lower, upper};
        }
        // Vertex enumeration: pick r coordinates, each at its low or high face.
        std::vector<std::size_t> pick(r);
        Eigen::MatrixXd M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(r));
        auto choose = [&](auto&& self, std::size_t pos, std::size_t first) -> void {
            if (pos == r) {
                for (std::size_t l = 0; l < r; ++l)
                    for (std::size_t q = 0; q < r; ++q)
                        M(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(q)) = a(pick[l], q);
                Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
                if (lu.rank() < static_cast<Eigen::Index>(r)) return;
                for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
                    for (std::size_t l = 0; l < r; ++l)
                        rhs(static_cast<Eigen::Index>(l)) = (mask >> l) & 1U ? hi[pick[l]] : lo[pick[l]];
                    const Eigen::VectorXd u = lu.solve(rhs);
                    if (feasible(u)) pts.push_back(u(0));
                }
                return;
            }
            for (std::size_t i = first; i < d; ++i) {
                pick[pos] = i;
                self(self, pos + 1, i + 1);
            }
        };
        choose(choose, 0, 0);
        if (pts.empty()) return {};
        std::sort(pts.begin(), pts.end());
        std::vector<double> uniq;
        for (double p : pts)
            if (uniq.empty() || p - uniq.back() > 1e-12 * (1.0 + std::abs(p))) uniq.push_back(p);
        if (uniq.size() < 2) return {};
        return uniq;
    }

    void recurse(std::size_t k, double weight) {
        const auto d = static_cast<std::size_t>(A_.rows());
        const std::size_t m = static_cast<std::size_t>(A_.cols());
        if (k == m) {
            for (std::size_t i = 0; i < d; ++i) {
                double s = c_(static_cast<Eigen::Index>(i));
                for (std::size_t l = 0; l < m; ++l) s += A_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * u_[l];
                x_[i] = std::clamp(s, box_.low[i], box_.high[i]);
            }
            std::fill(tmp_.begin(), tmp_.end(), 0.0);
            m_(x_, tmp_);
            ++evals_;
            for (std::size_t o = 0; o < acc_.size(); ++o) acc_[o] += weight * tmp_[o];
            return;
        }
        const std::vector<double> bp = breakpoints(k);
        for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
            const double mid = 0.5 * (bp[p] + bp[p + 1]);
            const double half = 0.5 * (bp[p + 1] - bp[p]);
            for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
                u_[k] = mid + half * rule_.nodes[q];
                recurse(k + 1, weight * half * rule_.weights[q]);
            }
        }
    }

    const Eigen::MatrixXd& A_;
    const Eigen::VectorXd& c_;
    const Box& box_;
    const SurfaceIntegrand& m_;
    const GaussRule& rule_;
    std::vector<double> acc_, tmp_, x_, u_;
    std::size_t evals_ = 0;
};

SurfaceIntegral monte_carlo_slice(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Box& box,
                                  const SurfaceIntegrand& m, std::size_t out_dim,
                                  const QuadratureOptions& opts) {
    const auto d = static_cast<std::size_t>(A.rows());
    const auto r = static_cast<std::size_t>(A.cols());
    std::vector<double> ulo(r, 0.0), uhi(r, 0.0);
    for (std::size_t l = 0; l < r; ++l) {
        for (std::size_t i = 0; i < d; ++i) {
            const double a = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
            const double p = a * (box.low[i] - c(static_cast<Eigen::Index>(i)));
            const double q = a * (box.high[i] - c(static_cast<Eigen::Index>(i)));
            ulo[l] += std::min(p, q);
            uhi[l] += std::max(p, q);
        }
    }
    double vol = 1.0;
    for (std::size_t l = 0; l < r; ++l) vol *= uhi[l] - ulo[l];
    Rng rng(opts.seed);
    std::vector<double> u(r), x(d), tmp(out_dim), sum(out_dim, 0.0), sum2(out_dim, 0.0);
    for (std::size_t s = 0; s < opts.mc_draws; ++s) {
        for (std::size_t l = 0; l < r; ++l) u[l] = rng.uniform(ulo[l], uhi[l]);
        for (std::size_t i = 0; i < d; ++i) {
            double v = c(static_cast<Eigen::Index>(i));
            for (std::size_t l = 0; l < r; ++l) v += A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) * u[l];
            x[i] = v;
        }
        if (!box.contains(x)) continue;
        std::fill(tmp.begin(), tmp.end(), 0.0);
        m(x, tmp);
        for (std::size_t o = 0; o < out_dim; ++o) {
            sum[o] += tmp[o];
            sum2[o] += tmp[o] * tmp[o];
        }
    }
    const double N = static_cast<double>(opts.mc_draws);
    SurfaceIntegral res;
    res.value.resize(out_dim);
    res.std_error.resize(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
        const double mean = sum[o] / N;
        const double var = std::max(0.0, sum2[o] / N - mean * mean);
        res.value[o] = vol * mean;
        res.std_error[o] = vol * std::sqrt(var / N);
    }
    res.evaluations = opts.mc_draws;
    res.monte_carlo = true;
    return res;
}

}  // namespace

SurfaceIntegral hausdorff_integral(const SurfaceIntegrand& m, std::size_t out_dim, const Direction& theta,
                                   double t, const Box& box, const QuadratureOptions& opts) {
    const std::size_t d = theta.dim();
    if (box.dim() != d) throw ConfigError("hausdorff_integral: box dimension differs from theta");
    for (std::size_t k = 0; k < d; ++k)
        if (!(box.low[k] < box.high[k]) || !std::isfinite(box.low[k]) || !std::isfinite(box.high[k]))
            throw ConfigError("hausdorff_integral: box bounds must be finite and ordered");
    if (opts.nodes == 0) throw ConfigError("hausdorff_integral: node count must be positive");
    const CoordFrame frame = orthonormal_complement(theta);
    const Eigen::MatrixXd A = frame.T.rightCols(static_cast<Eigen::Index>(d - 1));
    Eigen::Map<const Eigen::VectorXd> th(theta.values().data(), static_cast<Eigen::Index>(d));
    const Eigen::VectorXd c = t * th;
    if (d == 1) {
        SurfaceIntegral res{std::vector<double>(out_dim, 0.0), std::vector<double>(out_dim, 0.0), 1, false};
        std::vector<double> x{c(0)};
        if (box.contains(x)) m(x, res.value);
        return res;
    }
    if (d > opts.max_quadrature_dim) {
        if (opts.mc_draws == 0) throw ConfigError("hausdorff_integral: mc_draws must be positive");
        return monte_carlo_slice(A, c, box, m, out_dim, opts);
    }
    return SliceQuadrature(A, c, box, m, out_dim, opts.nodes).run();
}

double hausdorff_integral(const std::function<double(std::span<const double>)>& m, const Direction& theta,
                          double t, const Box& box, const QuadratureOptions& opts) {
    SurfaceIntegrand wrapped = [&](std::span<const double> x, std::span<double> out) { out[0] = m(x); };
    return hausdorff_integral(wrapped, 1, theta, t, box, opts).value[0];
}

namespace {

void require_single_index(const SurfaceIntegrandSpec& spec) {
    spec.dgp.validate();
    if (spec.dgp.design != Design::SingleIndex)
        throw ConfigError("surface matrices with closed-form weights need the single-index design");
}

// Symmetric d x d matrix from the integral of w(x) x x'.
Eigen::MatrixXd outer_product_integral(const std::function<double(std::span<const double>)>& w,
                                       const Direction& theta, const Box& box, const QuadratureOptions& opts) {
    const std::size_t d = theta.dim();
    SurfaceIntegrand integrand = [&](std::span<const double> x, std::span<double> out) {
        const double wx = w(x);
        std::size_t o = 0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) out[o++] = wx * x[a] * x[b];
    };
    const SurfaceIntegral res = hausdorff_integral(integrand, d * (d + 1) / 2, theta, 0.0, box, opts);
    Eigen::MatrixXd M(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::size_t o = 0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            M(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = res.value[o];
            M(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = res.value[o];
            ++o;
        }
    return M;
}

constexpr double kErrorDensityAtZero = 0.25;  // logistic density at 0

}  // namespace

Eigen::MatrixXd compute_V(const SurfaceIntegrandSpec& spec) {
    require_single_index(spec);
    const Box box = Box::cube(spec.dgp.d, spec.dgp.covariate_low, spec.dgp.covariate_high);
    const double p = 1.0 / box.volume();
    const double f = kErrorDensityAtZero;
    auto w = [&](std::span<const double>) { return f / (f + 1.0) * p; };
    return outer_product_integral(w, spec.dgp.theta(), box, spec.quadrature);
}

OmegaResult compute_Omega_kernel(const SurfaceIntegrandSpec& spec, const KernelSpec& kernel) {
    require_single_index(spec);
    kernel.validate();
    const Direction theta0 = spec.dgp.theta();
    const Box box = Box::cube(spec.dgp.d, spec.dgp.covariate_low, spec.dgp.covariate_high);
    const double p = 1.0 / box.volume();
    const double f = kErrorDensityAtZero;
    auto w = [&](std::span<const double> x) {
        const double h0 = true_h0(Design::SingleIndex, x, theta0);
        const double sigma2 = 0.25 - h0 * h0;
        return sigma2 / ((f + 1.0) * (f + 1.0)) * p;
    };
    OmegaResult res;
    res.surface = outer_product_integral(w, theta0, box, spec.quadrature);
    res.g_squared_integral = kernel_profile_moment(kernel, theta0, 0, 2, spec.quadrature);
    res.omega = res.g_squared_integral * res.surface;
    return res;
}

std::vector<double> compute_L(const SurfaceIntegrandSpec& spec,
                              const std::function<double(std::span<const double>)>& h) {
    require_single_index(spec);
    const std::size_t d = spec.dgp.d;
    const Box box = Box::cube(d, spec.dgp.covariate_low, spec.dgp.covariate_high);
    const double p = 1.0 / box.volume();
    const double f = kErrorDensityAtZero;
    SurfaceIntegrand integrand = [&](std::span<const double> x, std::span<double> out) {
        const double wx = h(x) / (f + 1.0) * p;
        for (std::size_t a = 0; a < d; ++a) out[a] = wx * x[a];
    };
    return hausdorff_integral(integrand, d, spec.dgp.theta(), 0.0, box, spec.quadrature).value;
}

double kernel_profile_G(const KernelSpec& kernel, const Direction& theta, double t,
                        const QuadratureOptions& opts) {
    kernel.validate();
    const double R = kernel.support_radius();
    const Box box = Box::cube(theta.dim(), -R, R);
    return hausdorff_integral([&](std::span<const double> x) { return kernel.product(x); }, theta, t, box,
                              opts);
}

double kernel_profile_moment(const KernelSpec& kernel, const Direction& theta, int power, int exponent,
                             const QuadratureOptions& opts) {
    kernel.validate();
    const std::size_t d = theta.dim();
    const double R = kernel.support_radius();
    // G(t) is smooth between the projections of the support cube's vertices.
    std::vector<double> bp;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += theta[k] * ((mask >> k) & 1U ? R : -R);
        bp.push_back(s);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             bp.end());
    const GaussRule& rule = gauss_legendre(opts.nodes);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
        const double mid = 0.5 * (bp[p] + bp[p + 1]);
        const double half = 0.5 * (bp[p + 1] - bp[p]);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double t = mid + half * rule.nodes[q];
            const double g = kernel_profile_G(kernel, theta, t, opts);
            total += half * rule.weights[q] * std::pow(t, power) * std::pow(g, exponent);
        }
    }
    return total;
}

Eigen::MatrixXd surface_matrix_sum(const Direction& theta, std::size_t J,
                                   const std::vector<std::function<double(std::span<const double>)>>& weights,
                                   const Box& box, const QuadratureOptions& opts) {
    const std::size_t d = theta.dim();
    if (weights.size() != J) throw ConfigError("surface_matrix_sum: need one weight per index");
    if (box.dim() != J * d) throw ConfigError("surface_matrix_sum: box must live in R^{J d}");
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<double> lifted(J * d, 0.0);
        for (std::size_t k = 0; k < d; ++k) lifted[j * d + k] = theta[k];
        const Direction normal = normalize(lifted);
        SurfaceIntegrand integrand = [&](std::span<const double> x, std::span<double> out) {
            const double wx = weights[j](x);
            std::size_t o = 0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b) out[o++] = wx * x[j * d + a] * x[j * d + b];
        };
        const SurfaceIntegral res = hausdorff_integral(integrand, d * (d + 1) / 2, normal, 0.0, box, opts);
        std::size_t o = 0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                total(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += res.value[o];
                if (a != b) total(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += res.value[o];
                ++o;
            }
    }
    return total;
}

Spectrum spectrum(const Eigen::MatrixXd& m, double rel_tol) {
    Spectrum s;
    s.asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd ev = es.eigenvalues();
    s.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    const double top = ev.maxCoeff();
    const double trace = sym.trace();
    s.psd = ev.minCoeff() >= -1e-8 * std::abs(trace);
    for (double v : s.eigenvalues)
        if (v > rel_tol * top) ++s.numerical_rank;
    return s;
}

}  // namespace rms
