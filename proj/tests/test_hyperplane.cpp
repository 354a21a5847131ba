#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

#include "core/dgp.hpp"
#include "core/hyperplane.hpp"
#include "core/kernels.hpp"
#include "core/quadrature.hpp"
#include "core/rng.hpp"
#include "support/oracles.hpp"

using namespace rms;

namespace {

const Direction kTheta0 = normalize(default_theta0());

SurfaceIntegrandSpec paper_spec() {
    SurfaceIntegrandSpec s;
    s.dgp.theta0 = default_theta0();
    return s;
}

// (1/5) x x' p(x) flattened, p uniform on [-2,2]^3.
void v_integrand(std::span<const double> x, std::span<double> out) {
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) out[a * 3 + b] = 0.2 * x[a] * x[b] / 64.0;
}

}  // namespace

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
    const GaussRule& g = gauss_legendre(8);
    for (int p = 0; p <= 15; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < 8; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
        const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
        CHECK(std::abs(s - exact) < 1e-14);
    }
}

TEST_CASE("orthonormal frames") {
    const std::vector<double> e{1.0, 0.0, 0.0};
    const CoordFrame id = orthonormal_complement(normalize(e));
    CHECK((id.T - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    Rng rng(1);
    for (int r = 0; r < 200; ++r) {
        const std::size_t d = 2 + rng.below(5);
        const Direction th = normalize(oracle::random_direction(rng, d));
        const CoordFrame f = orthonormal_complement(th);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
        CHECK((f.T.transpose() * f.T - I).cwiseAbs().maxCoeff() < 1e-14);
        for (std::size_t k = 0; k < d; ++k) CHECK(std::abs(f.T(k, 0) - th[k]) < 1e-15);
        const CoordFrame g = orthonormal_complement(-th);
        for (std::size_t k = 0; k < d; ++k) CHECK(g.T(k, 0) == doctest::Approx(-f.T(k, 0)));
    }
}

TEST_CASE("slice area of the cube") {
    const std::vector<double> e{1.0, 0.0, 0.0};
    const Box cube = Box::cube(3, -2.0, 2.0);
    const double area = hausdorff_integral([](std::span<const double>) { return 1.0; }, normalize(e), 0.0, cube);
    CHECK(std::abs(area - 16.0) < 1e-10);
    // Diagonal slice through the center of [-1,1]^3 is a regular hexagon with side sqrt(2).
    const std::vector<double> diag{1.0, 1.0, 1.0};
    const double hex = hausdorff_integral([](std::span<const double>) { return 1.0; }, normalize(diag), 0.0,
                                          Box::cube(3, -1.0, 1.0));
    CHECK(std::abs(hex - 3.0 * std::sqrt(3.0)) < 1e-10);
}

TEST_CASE("integrand vanishing on the slice integrates to zero") {
    const Box cube = Box::cube(3, -2.0, 2.0);
    const double v = hausdorff_integral(
        [](std::span<const double> x) { return x[0] * kTheta0[0] + x[1] * kTheta0[1] + x[2] * kTheta0[2]; },
        kTheta0, 0.0, cube);
    CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("slice integral agrees with the thin-slab oracle") {
    const Box cube = Box::cube(3, -2.0, 2.0);
    const SurfaceIntegrand ind = [&](std::span<const double> x, std::span<double> out) {
        out[0] = cube.contains(x) ? 1.0 : 0.0;
    };
    const SurfaceIntegral q = hausdorff_integral(ind, 1, kTheta0, 0.0, cube);
    const oracle::SlabEstimate s = oracle::slab_integral(ind, 1, kTheta0, 0.0, cube, 10000000, 2);
    MESSAGE("slice area: quadrature " << q.value[0] << ", slab " << s.value[0] << " +- " << s.std_error[0]);
    CHECK(std::abs(q.value[0] - s.value[0]) < 3.0 * s.std_error[0]);
    // Off-center slice and a non-constant integrand.
    const SurfaceIntegrand poly = [](std::span<const double> x, std::span<double> out) {
        out[0] = 1.0 + x[0] * x[0] - 0.5 * x[1] * x[2];
    };
    const SurfaceIntegral q2 = hausdorff_integral(poly, 1, kTheta0, 0.7, cube);
    const oracle::SlabEstimate s2 = oracle::slab_integral(poly, 1, kTheta0, 0.7, cube, 10000000, 3);
    CHECK(std::abs(q2.value[0] - s2.value[0]) < 3.0 * s2.std_error[0]);
}

TEST_CASE("V: symmetric, PSD, rank d-1, null along theta0") {
    const Eigen::MatrixXd V = compute_V(paper_spec());
    const Spectrum s = spectrum(V);
    CHECK(s.asymmetry < 1e-10);
    CHECK(s.psd);
    CHECK(s.eigenvalues.front() >= -1e-8 * V.trace());
    CHECK(s.numerical_rank == 2);
    const Eigen::Map<const Eigen::Vector3d> t0(kTheta0.values().data());
    CHECK((V * t0).norm() < 1e-8);
}

TEST_CASE("V agrees with the thin-slab oracle entry by entry") {
    const Eigen::MatrixXd V = compute_V(paper_spec());
    const oracle::SlabEstimate s =
        oracle::slab_integral(v_integrand, 9, kTheta0, 0.0, Box::cube(3, -2.0, 2.0), 10000000, 4);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            const std::size_t c = a * 3 + b;
            CHECK(std::abs(V(a, b) - s.value[c]) < 3.0 * s.std_error[c]);
        }
}

TEST_CASE("Omega: kernel factor and surface factor") {
    KernelSpec k;
    const OmegaResult om = compute_Omega_kernel(paper_spec(), k);
    CHECK(std::abs(om.g_squared_integral - 1.0 / (2.0 * std::sqrt(std::numbers::pi))) < 1e-6);
    // sigma^2 = 1/4 on the slice, so the surface factor is (4/25) x x' p = 0.8 V.
    const Eigen::MatrixXd V = compute_V(paper_spec());
    CHECK((om.surface - 0.8 * V).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((om.omega - om.g_squared_integral * om.surface).cwiseAbs().maxCoeff() < 1e-14);
    const Spectrum s = spectrum(om.omega);
    CHECK(s.psd);
    CHECK(s.asymmetry < 1e-10);
    const Eigen::Map<const Eigen::Vector3d> t0(kTheta0.values().data());
    CHECK((om.omega * t0).norm() < 1e-8);
}

TEST_CASE("Gaussian kernel profile is the standard normal density") {
    KernelSpec k;
    Rng rng(5);
    double worst = 0.0;
    for (int r = 0; r < 5; ++r) {
        const Direction th = normalize(oracle::random_direction(rng, 3));
        for (double t = -3.0; t <= 3.0; t += 0.25)
            worst = std::max(worst, std::abs(kernel_profile_G(k, th, t) - gaussian_density(t)));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("kernel profile moments") {
    for (KernelFamily fam : {KernelFamily::GaussianProduct, KernelFamily::EpanechnikovProduct,
                             KernelFamily::HigherOrderGaussianProduct}) {
        KernelSpec k;
        k.family = fam;
        k.order = 4;
        const QuadratureOptions q;
        CHECK(std::abs(kernel_profile_moment(k, kTheta0, 0, 1, q) - 1.0) < 1e-6);
        CHECK(std::abs(kernel_profile_moment(k, kTheta0, 1, 1, q)) < 1e-5);
        if (fam == KernelFamily::HigherOrderGaussianProduct)
            for (int j = 2; j < 4; ++j) CHECK(std::abs(kernel_profile_moment(k, kTheta0, j, 1, q)) < 1e-5);
        for (double t : {0.1, 0.45, 0.8})
            CHECK(kernel_profile_G(k, kTheta0, t, q) == doctest::Approx(kernel_profile_G(k, kTheta0, -t, q)).epsilon(1e-9));
    }
}

TEST_CASE("L(h) agrees with the thin-slab oracle") {
    auto h = [](std::span<const double> x) { return 0.3 * x[0] - 0.1 * x[1] * x[1]; };
    const std::vector<double> L = compute_L(paper_spec(), h);
    const SurfaceIntegrand m = [&](std::span<const double> x, std::span<double> out) {
        for (std::size_t k = 0; k < 3; ++k) out[k] = h(x) / 1.25 * x[k] / 64.0;
    };
    const oracle::SlabEstimate s = oracle::slab_integral(m, 3, kTheta0, 0.0, Box::cube(3, -2.0, 2.0), 10000000, 6);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(L[k] - s.value[k]) < 3.0 * s.std_error[k]);
}

TEST_CASE("J-index surface sum reduces to V for J=1") {
    const std::vector<std::function<double(std::span<const double>)>> w{
        [](std::span<const double>) { return 0.2 / 64.0; }};
    const Eigen::MatrixXd S = surface_matrix_sum(kTheta0, 1, w, Box::cube(3, -2.0, 2.0));
    CHECK((S - compute_V(paper_spec())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("J-index surface sum for two blocks is PSD and null along each theta block") {
    const std::vector<std::function<double(std::span<const double>)>> w{
        [](std::span<const double>) { return 1.0; }, [](std::span<const double>) { return 0.5; }};
    QuadratureOptions q;
    q.nodes = 12;
    q.mc_draws = 200000;
    const Eigen::MatrixXd S = surface_matrix_sum(kTheta0, 2, w, Box::cube(6, -2.0, 2.0), q);
    CHECK(S.rows() == 3);
    const Spectrum s = spectrum(S);
    CHECK(s.asymmetry < 1e-10);
    CHECK(s.eigenvalues.front() >= -1e-8 * S.trace());
    const Eigen::Map<const Eigen::Vector3d> t0(kTheta0.values().data());
    CHECK((S * t0).norm() < 1e-8 * S.norm());
}

TEST_CASE("Monte Carlo fallback above the quadrature dimension") {
    std::vector<double> e(5, 0.0);
    e[0] = 1.0;
    const SurfaceIntegrand one = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    const SurfaceIntegral r = hausdorff_integral(one, 1, normalize(e), 0.0, Box::cube(5, -1.0, 1.0));
    CHECK(r.monte_carlo);
    CHECK(r.std_error[0] >= 0.0);
    CHECK(std::abs(r.value[0] - 16.0) <= 3.0 * r.std_error[0] + 1e-9);
}
