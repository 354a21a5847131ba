// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: rms_acceptance [criterion ...]   (default: all ten)

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/hyperplane.hpp"
#include "core/kernels.hpp"
#include "support/oracles.hpp"

using namespace rms;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ExperimentConfig load(const std::string& name) {
    return experiment_from_json(read_json_file(std::string(RMS_CONFIG_DIR) + "/" + name));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

McReport run(const ExperimentConfig& c) {
    McReport r = run_experiment(c);
    for (const CellReport& cell : r.cells)
        if (!cell.failures.empty())
            throw ExperimentError(fmt("n=%zu: %zu failed replications", cell.n, cell.failures.size()));
    return r;
}

Outcome oracle_second_stage() {
    const ExperimentConfig c = load("oracle.json");
    const auto t0 = std::chrono::steady_clock::now();
    const McReport r = run(c);
    const double secs = seconds_since(t0);
    const double m = r.cells.at(0).metrics.one_minus_mean_ang;
    return {m < 1e-3 && secs < 120.0, fmt("1-mean cos = %.3g (< 1e-3), %.1f s (< 120 s)", m, secs)};
}

Outcome table1_band() {
    const ExperimentConfig c = load("table1_kernel.json");
    const auto t0 = std::chrono::steady_clock::now();
    const McReport r = run(c);
    const double secs = seconds_since(t0);
    double m1000 = NAN, m5000 = NAN;
    for (const CellReport& cell : r.cells) {
        if (cell.n == 1000) m1000 = cell.metrics.one_minus_mean_ang;
        if (cell.n == 5000) m5000 = cell.metrics.one_minus_mean_ang;
    }
    const bool ok = m5000 >= 0.0012 && m5000 <= 0.011 && m1000 >= 0.002 && m1000 <= 0.018 && secs < 1200.0;
    return {ok, fmt("n=1000 %.5f in [0.002,0.018], n=5000 %.5f in [0.0012,0.011], %.0f s (< 1200 s)", m1000,
                    m5000, secs)};
}

Outcome table23_band() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"table2_mlp.json", "table3_joint.json"}) {
        ExperimentConfig c = load(name);
        c.sample_sizes = {5000};
        c.dgp.n = 5000;
        const double m = run(c).cells.at(0).metrics.one_minus_mean_ang;
        ok = ok && m < 0.012;
        detail += fmt("%s %.5f (< 0.012); ", c.estimator.kind == EstimatorKind::JointDnn ? "joint" : "mlp", m);
    }
    return {ok, detail};
}

Outcome table5_direction() {
    const McReport r = run(load("table5_mlp_two_index.json"));
    double m1000 = NAN, m5000 = NAN;
    for (const CellReport& cell : r.cells) {
        if (cell.n == 1000) m1000 = cell.metrics.one_minus_mean_ang;
        if (cell.n == 5000) m5000 = cell.metrics.one_minus_mean_ang;
    }
    return {m5000 <= m1000 / 3.0, fmt("n=1000 %.5f, n=5000 %.5f, ratio %.3f (<= 1/3)", m1000, m5000, m5000 / m1000)};
}

Outcome rate_slope() {
    ExperimentConfig c = load("table1_kernel.json");
    c.label = "rate";
    c.sample_sizes = {500, 1000, 2000, 5000};
    c.dgp.n = 500;
    c.replications = 100;
    const McReport r = run(c);
    std::vector<double> lx, ly;
    for (const CellReport& cell : r.cells) {
        lx.push_back(std::log(static_cast<double>(cell.n)));
        ly.push_back(std::log(cell.metrics.one_minus_median_ang));
    }
    const double k = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    std::string medians;
    for (std::size_t i = 0; i < ly.size(); ++i) medians += fmt("%zu:%.5f ", r.cells[i].n, std::exp(ly[i]));
    return {slope >= -1.2 && slope <= -0.4, fmt("slope %.3f in [-1.2,-0.4]; medians %s", slope, medians.c_str())};
}

Outcome subgradient() {
    const oracle::FdReport rep = oracle::subgradient_suite(1000, 20240106);
    return {rep.checked == 1000 && rep.max_rel_error < 1e-5,
            fmt("%zu configs, max rel error %.3g (< 1e-5)", rep.checked, rep.max_rel_error)};
}

Outcome network_gradients() {
    const oracle::FdReport j1 = oracle::network_gradient_check(1, 71);
    const oracle::FdReport j2 = oracle::network_gradient_check(2, 72);
    const oracle::FdReport mlp = oracle::mlp_gradient_check(73);
    const double worst = std::max({j1.max_rel_error, j2.max_rel_error, mlp.max_rel_error});
    return {worst < 1e-4, fmt("RMS net J=1 %.3g (%zu params), J=2 %.3g (%zu), MLP %.3g (%zu); max < 1e-4",
                              j1.max_rel_error, j1.checked, j2.max_rel_error, j2.checked, mlp.max_rel_error,
                              mlp.checked)};
}

Outcome hyperplane_suite() {
    const Box cube = Box::cube(3, -2.0, 2.0);
    const std::vector<double> e1{1.0, 0.0, 0.0};
    const double area = hausdorff_integral([](std::span<const double>) { return 1.0; }, normalize(e1), 0.0, cube);

    SurfaceIntegrandSpec spec;
    spec.dgp.theta0 = default_theta0();
    const Direction th0 = spec.dgp.theta();
    const Eigen::MatrixXd V = compute_V(spec);
    const Eigen::Map<const Eigen::Vector3d> t0(th0.values().data());
    const double null_norm = (V * t0).norm();
    const Spectrum s = spectrum(V);

    const SurfaceIntegrand vint = [](std::span<const double> x, std::span<double> out) {
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 3; ++b) out[a * 3 + b] = 0.2 * x[a] * x[b] / 64.0;
    };
    const oracle::SlabEstimate slab = oracle::slab_integral(vint, 9, th0, 0.0, cube, 10000000, 8);
    double worst_se = 0.0;
    for (std::size_t c = 0; c < 9; ++c)
        worst_se = std::max(worst_se, std::abs(V(c / 3, c % 3) - slab.value[c]) / slab.std_error[c]);

    const KernelSpec k;
    const double g_mass = kernel_profile_moment(k, th0, 0, 1);
    double g_err = 0.0;
    for (double t = -3.0; t <= 3.0; t += 0.125) g_err = std::max(g_err, std::abs(kernel_profile_G(k, th0, t) - gaussian_density(t)));

    const bool ok = std::abs(area - 16.0) < 1e-10 && null_norm < 1e-8 && s.psd && s.numerical_rank == 2 &&
                    worst_se < 3.0 && std::abs(g_mass - 1.0) < 1e-6 && g_err < 1e-6;
    return {ok, fmt("area err %.2g, |V theta0| %.2g, psd %d rank %zu, slab max %.2f SE, |intG-1| %.2g, "
                    "G vs phi %.2g",
                    std::abs(area - 16.0), null_norm, s.psd ? 1 : 0, s.numerical_rank, worst_se,
                    std::abs(g_mass - 1.0), g_err)};
}

Outcome criterion_bounds() {
    const oracle::BoundReport rep = oracle::criterion_bound_suite(10000, 20240109);
    return {rep.draws == 10000 && rep.max_excess <= 1e-12 && rep.max_equality_gap <= 1e-12,
            fmt("%zu draws, max excess %.3g, max equality gap %.3g (<= 1e-12)", rep.draws, rep.max_excess,
                rep.max_equality_gap)};
}

Outcome determinism() {
    std::string detail;
    bool ok = true;
    for (const char* name : {"smoke.json", "table3_joint.json"}) {
        ExperimentConfig c = load(name);
        if (c.estimator.kind == EstimatorKind::JointDnn) {
            c.sample_sizes = {400};
            c.dgp.n = 400;
            c.replications = 3;
        }
        const std::string a = render_csv(run_experiment(c));
        const std::string b = render_csv(run_experiment(c));
        ok = ok && a == b;
        detail += fmt("%s %s; ", name, a == b ? "identical" : "DIFFERENT");
    }
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle second stage", oracle_second_stage},
        {"kernel two-stage band (table 1)", table1_band},
        {"MLP and joint DNN band (tables 2/3)", table23_band},
        {"two-index MLP improvement (table 5)", table5_direction},
        {"kernel rate slope", rate_slope},
        {"criterion subgradient vs finite differences", subgradient},
        {"network gradients vs finite differences", network_gradients},
        {"hyperplane quadrature suite", hyperplane_suite},
        {"criterion bounds", criterion_bounds},
        {"determinism of simulate CSV", determinism},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::atoi(argv[i])));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && !selected.count(i + 1)) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
