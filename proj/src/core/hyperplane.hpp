#pragma once

// (d-1)-dimensional Hausdorff integrals over hyperplane slices
// {x : x'theta = t} intersected with a box, and the surface matrices built
// from them (curvature V, variance Omega, kernel profile G, functional L).

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/dgp.hpp"
#include "core/direction.hpp"
#include "core/kernels.hpp"

namespace rms {

// Orthonormal T whose first column is theta; the rest span theta's complement.
struct CoordFrame {
    Direction theta;
    Eigen::MatrixXd T;
};

// Householder completion, sign fixed so that theta = e_1 gives the identity.
CoordFrame orthonormal_complement(const Direction& theta);

struct Box {
    std::vector<double> low;
    std::vector<double> high;

    static Box cube(std::size_t d, double low, double high);
    std::size_t dim() const noexcept { return low.size(); }
    double volume() const;
    bool contains(std::span<const double> x, double tol = 0.0) const;
};

struct QuadratureOptions {
    std::size_t nodes = 64;           // Gauss-Legendre nodes per piece and dimension
    std::size_t max_quadrature_dim = 4;  // ambient dimension above which MC is used
    std::size_t mc_draws = 400000;
    std::uint64_t seed = 12345;
};

// Integrand writes `out_dim` values for a point x on the slice.
using SurfaceIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

struct SurfaceIntegral {
    std::vector<double> value;
    std::vector<double> std_error;  // zero for deterministic quadrature
    std::size_t evaluations = 0;
    bool monte_carlo = false;
};

SurfaceIntegral hausdorff_integral(const SurfaceIntegrand& m, std::size_t out_dim, const Direction& theta,
                                   double t, const Box& box, const QuadratureOptions& opts = {});

double hausdorff_integral(const std::function<double(std::span<const double>)>& m, const Direction& theta,
                          double t, const Box& box, const QuadratureOptions& opts = {});

enum class SurfaceWeight { Hessian, OmegaKernel, Linear };

struct SurfaceIntegrandSpec {
    SurfaceWeight weight = SurfaceWeight::Hessian;
    DgpSpec dgp;
    QuadratureOptions quadrature;
};

// Logistic single-index design: f(0|x) = 1/4 and p(x) uniform on the box.
Eigen::MatrixXd compute_V(const SurfaceIntegrandSpec& spec);

struct OmegaResult {
    Eigen::MatrixXd omega;
    double g_squared_integral = 0.0;  // int G(t)^2 dt
    Eigen::MatrixXd surface;          // the hyperplane factor alone
};

OmegaResult compute_Omega_kernel(const SurfaceIntegrandSpec& spec, const KernelSpec& kernel);

// L(h) = int_{x'theta0 = 0} h(x) / (f(0|x) + 1) x p(x) dH^{d-1}.
std::vector<double> compute_L(const SurfaceIntegrandSpec& spec,
                              const std::function<double(std::span<const double>)>& h);

// G(t) = int_{x'theta = t} K(x) dH^{d-1}(x) on the kernel's truncated support.
double kernel_profile_G(const KernelSpec& kernel, const Direction& theta, double t,
                        const QuadratureOptions& opts = {});

// int t^power G(t)^exponent dt over the kernel's projected support.
double kernel_profile_moment(const KernelSpec& kernel, const Direction& theta, int power, int exponent = 1,
                             const QuadratureOptions& opts = {});

// sum_j int_{x_j'theta = 0} m_j(x) x_j x_j' dH^{Jd-1}(x) for x = (x_1..x_J) in the box.
Eigen::MatrixXd surface_matrix_sum(const Direction& theta, std::size_t J,
                                   const std::vector<std::function<double(std::span<const double>)>>& weights,
                                   const Box& box, const QuadratureOptions& opts = {});

struct Spectrum {
    std::vector<double> eigenvalues;  // ascending
    std::size_t numerical_rank = 0;
    bool psd = false;
    double asymmetry = 0.0;  // max |A - A'|
};

// Rank counts eigenvalues above rel_tol * max eigenvalue.
Spectrum spectrum(const Eigen::MatrixXd& m, double rel_tol = 1e-6);

}  // namespace rms
