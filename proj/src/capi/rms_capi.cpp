#include "rms/rms.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "core/config.hpp"
#include "core/criterion.hpp"
#include "core/dataset_io.hpp"
#include "core/error.hpp"
#include "core/experiment.hpp"
#include "core/first_stage.hpp"
#include "core/hyperplane.hpp"

struct rms_dataset {
    std::shared_ptr<const rms::Dataset> data;
};

struct rms_regressor {
    rms::FittedRegressor model;
};

struct rms_report {
    rms::McReport report;
    std::string output_dir;
};

namespace {

thread_local std::string g_last_error;

rms_status fail(rms_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

// Maps the core's exception hierarchy onto status codes.
template <class F>
rms_status guarded(F&& body) {
    try {
        body();
        return RMS_OK;
    } catch (const rms::ConfigError& e) {
        return fail(RMS_ERR_CONFIG, e.what());
    } catch (const rms::ExperimentError& e) {
        return fail(RMS_ERR_EXPERIMENT, e.what());
    } catch (const rms::NumericalError& e) {
        return fail(RMS_ERR_NUMERICAL, e.what());
    } catch (const rms::IoError& e) {
        return fail(RMS_ERR_IO, e.what());
    } catch (const std::bad_alloc&) {
        return fail(RMS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(RMS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(RMS_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

rms::CriterionSpec make_criterion(const rms_dataset* data, const rms_regressor* model, const char* design,
                                  const double* theta0, std::size_t d) {
    if (model) return rms::CriterionSpec::from_regressor(*data->data, model->model);
    if (!design || !theta0) throw rms::ConfigError("oracle criterion needs a design and theta0");
    return rms::CriterionSpec::from_oracle(*data->data, rms::design_from_string(design),
                                           rms::normalize(std::span<const double>(theta0, d)));
}

}  // namespace

#define RMS_REQUIRE(cond, what) \
    if (!(cond)) return fail(RMS_ERR_INVALID_ARGUMENT, what)

extern "C" {

const char* rms_version(void) { return "1.0.0"; }

const char* rms_last_error(void) { return g_last_error.c_str(); }

void rms_string_free(char* s) { delete[] s; }

rms_status rms_dataset_generate(const char* dgp_json, rms_dataset** out) {
    RMS_REQUIRE(dgp_json && out, "rms_dataset_generate: null argument");
    return guarded([&] {
        const rms::DgpSpec spec = rms::dgp_from_json(rms::parse_json(dgp_json));
        *out = new rms_dataset{std::make_shared<const rms::Dataset>(rms::generate(spec))};
    });
}

rms_status rms_dataset_read_csv(const char* path, rms_dataset** out) {
    RMS_REQUIRE(path && out, "rms_dataset_read_csv: null argument");
    return guarded([&] { *out = new rms_dataset{std::make_shared<const rms::Dataset>(rms::read_dataset_csv(path))}; });
}

rms_status rms_dataset_write_csv(const rms_dataset* data, const char* path) {
    RMS_REQUIRE(data && path, "rms_dataset_write_csv: null argument");
    return guarded([&] { rms::write_dataset_csv(*data->data, path); });
}

rms_status rms_dataset_shape(const rms_dataset* data, size_t* n, size_t* J, size_t* d) {
    RMS_REQUIRE(data, "rms_dataset_shape: null dataset");
    if (n) *n = data->data->n;
    if (J) *J = data->data->J;
    if (d) *d = data->data->d;
    return RMS_OK;
}

rms_status rms_dataset_row(const rms_dataset* data, size_t i, double* x, size_t len, double* y_centered) {
    RMS_REQUIRE(data && x, "rms_dataset_row: null argument");
    RMS_REQUIRE(i < data->data->n, "rms_dataset_row: row index out of range");
    RMS_REQUIRE(len == data->data->width(), "rms_dataset_row: buffer length must be J*d");
    const auto row = data->data->row(i);
    std::copy(row.begin(), row.end(), x);
    if (y_centered) *y_centered = data->data->y_centered[i];
    return RMS_OK;
}

void rms_dataset_free(rms_dataset* data) { delete data; }

rms_status rms_regressor_fit(const rms_dataset* data, const char* spec_json, rms_regressor** out) {
    RMS_REQUIRE(data && spec_json && out, "rms_regressor_fit: null argument");
    return guarded([&] {
        const nlohmann::json j = rms::parse_json(spec_json);
        const std::string type = j.value("type", "");
        const nlohmann::json body = j.contains(type) ? j.at(type) : nlohmann::json::object();
        if (type == "kernel") {
            *out = new rms_regressor{rms::fit_kernel(data->data, rms::kernel_from_json(body))};
        } else if (type == "series") {
            *out = new rms_regressor{rms::fit_series(*data->data, rms::series_from_json(body))};
        } else if (type == "mlp") {
            *out = new rms_regressor{rms::fit_mlp(*data->data, rms::mlp_from_json(body))};
        } else if (type == "kernel_ridge") {
            *out = new rms_regressor{rms::fit_kernel_ridge(*data->data, rms::ridge_from_json(body))};
        } else {
            throw rms::ConfigError("rms_regressor_fit: unknown type '" + type + "'");
        }
    });
}

rms_status rms_regressor_predict(const rms_regressor* model, const double* x, size_t len, double* out) {
    RMS_REQUIRE(model && x && out, "rms_regressor_predict: null argument");
    return guarded([&] { *out = model->model.predict(std::span<const double>(x, len)); });
}

rms_status rms_regressor_dump(const rms_regressor* model, const char* dataset_ref, char** out_json) {
    RMS_REQUIRE(model && out_json, "rms_regressor_dump: null argument");
    return guarded([&] { *out_json = dup_string(rms::model_dump(model->model, dataset_ref ? dataset_ref : "").dump(2)); });
}

void rms_regressor_free(rms_regressor* model) { delete model; }

rms_status rms_true_h0(const char* design, const double* x, size_t len, const double* theta0, size_t d,
                       double* out) {
    RMS_REQUIRE(design && x && theta0 && out, "rms_true_h0: null argument");
    return guarded([&] {
        *out = rms::true_h0(rms::design_from_string(design), std::span<const double>(x, len),
                            rms::normalize(std::span<const double>(theta0, d)));
    });
}

rms_status rms_criterion(const rms_dataset* data, const rms_regressor* model, const char* design,
                         const double* theta0, const double* theta, size_t d, double* q, double* q_plus,
                         double* q_minus) {
    RMS_REQUIRE(data && theta && (model || (design && theta0)), "rms_criterion: null argument");
    return guarded([&] {
        const rms::CriterionSpec spec = make_criterion(data, model, design, theta0, d);
        const rms::CriterionValue v = rms::sample_criterion(spec, std::span<const double>(theta, d));
        if (q) *q = v.q;
        if (q_plus) *q_plus = v.q_plus;
        if (q_minus) *q_minus = v.q_minus;
    });
}

rms_status rms_criterion_subgradient(const rms_dataset* data, const rms_regressor* model, const char* design,
                                     const double* theta0, const double* theta, size_t d, double* grad) {
    RMS_REQUIRE(data && theta && grad && (model || (design && theta0)),
                "rms_criterion_subgradient: null argument");
    return guarded([&] {
        const rms::CriterionSpec spec = make_criterion(data, model, design, theta0, d);
        const auto g = rms::criterion_subgradient(spec, std::span<const double>(theta, d));
        std::copy(g.begin(), g.end(), grad);
    });
}

rms_status rms_estimate(const rms_dataset* data, const char* estimator_json, uint64_t seed, const double* theta0,
                        double* theta_out, size_t d, double* q_out) {
    RMS_REQUIRE(data && estimator_json && theta_out, "rms_estimate: null argument");
    RMS_REQUIRE(d == data->data->d, "rms_estimate: output length must equal d");
    return guarded([&] {
        const rms::EstimatorConfig cfg = rms::estimator_from_json(rms::parse_json(estimator_json));
        rms::Direction truth;
        if (cfg.kind == rms::EstimatorKind::TwoStageOracle) {
            if (!theta0) throw rms::ConfigError("oracle estimator needs theta0");
            truth = rms::normalize(std::span<const double>(theta0, d));
        }
        const rms::Design design = data->data->J == 1 ? rms::Design::SingleIndex : rms::Design::TwoIndex;
        if (cfg.kind == rms::EstimatorKind::TwoStageOracle && data->data->J > 2)
            throw rms::ConfigError("oracle estimator supports J <= 2 only");
        const rms::EstimateResult r = rms::estimate(*data->data, cfg, seed, design, truth);
        std::copy(r.theta_hat.values().begin(), r.theta_hat.values().end(), theta_out);
        if (q_out) *q_out = r.q_hat;
    });
}

rms_status rms_simulate(const char* config_json, size_t threads, rms_report** out) {
    RMS_REQUIRE(config_json && out, "rms_simulate: null argument");
    return guarded([&] {
        const rms::ExperimentConfig cfg = rms::experiment_from_json(rms::parse_json(config_json));
        *out = new rms_report{rms::run_experiment(cfg, threads), cfg.output_dir};
    });
}

rms_status rms_report_render(const rms_report* report, const char* format, char** out) {
    RMS_REQUIRE(report && format && out, "rms_report_render: null argument");
    return guarded([&] { *out = dup_string(rms::render(report->report, rms::report_format_from_string(format))); });
}

rms_status rms_report_write(const rms_report* report, const char* dir, const char* format) {
    RMS_REQUIRE(report && format, "rms_report_write: null argument");
    return guarded([&] {
        rms::emit_report(report->report, rms::report_format_from_string(format), dir ? dir : report->output_dir);
    });
}

rms_status rms_report_cells(const rms_report* report, size_t* cells) {
    RMS_REQUIRE(report && cells, "rms_report_cells: null argument");
    *cells = report->report.cells.size();
    return RMS_OK;
}

rms_status rms_report_metric(const rms_report* report, size_t cell, const char* metric, double* out) {
    RMS_REQUIRE(report && metric && out, "rms_report_metric: null argument");
    RMS_REQUIRE(cell < report->report.cells.size(), "rms_report_metric: cell out of range");
    const rms::CellReport& c = report->report.cells[cell];
    const rms::MetricBlock& m = c.metrics;
    const std::string name(metric);
    auto indexed = [&](const char* prefix, const std::vector<double>& v) -> bool {
        const std::string p = std::string(prefix) + "_theta_";
        if (name.rfind(p, 0) != 0) return false;
        const std::size_t k = std::stoul(name.substr(p.size()));
        if (k == 0 || k > v.size()) return false;
        *out = v[k - 1];
        return true;
    };
    if (name == "n") *out = static_cast<double>(c.n);
    else if (name == "l2_norm_bias") *out = m.l2_norm_bias;
    else if (name == "one_minus_mean_angular_similarity") *out = m.one_minus_mean_ang;
    else if (name == "one_minus_median_angular_similarity") *out = m.one_minus_median_ang;
    else if (name == "replications_ok") *out = static_cast<double>(c.estimates.size());
    else if (name == "replications_failed") *out = static_cast<double>(c.failures.size());
    else if (name == "runtime_total_s") *out = c.runtime_total_s;
    else if (!(indexed("mse", m.mse) || indexed("bias", m.bias) || indexed("sd", m.sd) ||
               indexed("l1_error", m.l1_error)))
        return fail(RMS_ERR_INVALID_ARGUMENT, "rms_report_metric: unknown metric '" + name + "'");
    return RMS_OK;
}

void rms_report_free(rms_report* report) { delete report; }

rms_status rms_diagnose_v(const char* config_json, char** out_json) {
    RMS_REQUIRE(config_json && out_json, "rms_diagnose_v: null argument");
    return guarded([&] {
        const nlohmann::json j = rms::parse_json(config_json);
        rms::SurfaceIntegrandSpec spec;
        spec.dgp = rms::dgp_from_json(j.value("dgp", nlohmann::json::object()));
        if (auto q = j.find("quadrature"); q != j.end()) {
            spec.quadrature.nodes = q->value("nodes", spec.quadrature.nodes);
            spec.quadrature.mc_draws = q->value("mc_draws", spec.quadrature.mc_draws);
            spec.quadrature.seed = q->value("seed", spec.quadrature.seed);
        }
        const rms::KernelSpec kernel =
            rms::kernel_from_json(j.value("kernel", nlohmann::json::object()));
        const Eigen::MatrixXd V = rms::compute_V(spec);
        const rms::OmegaResult om = rms::compute_Omega_kernel(spec, kernel);
        const rms::Direction th = spec.dgp.theta();
        Eigen::Map<const Eigen::VectorXd> t0(th.values().data(), static_cast<Eigen::Index>(th.dim()));
        auto rows = [](const Eigen::MatrixXd& m) {
            std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(r)].push_back(m(r, c));
            return out;
        };
        const rms::Spectrum sv = rms::spectrum(V);
        const rms::Spectrum so = rms::spectrum(om.omega);
        const nlohmann::json result = {
            {"theta0", th.vec()},
            {"V", rows(V)},
            {"V_eigenvalues", sv.eigenvalues},
            {"V_rank", sv.numerical_rank},
            {"norm_V_theta0", (V * t0).norm()},
            {"Omega", rows(om.omega)},
            {"Omega_eigenvalues", so.eigenvalues},
            {"norm_Omega_theta0", (om.omega * t0).norm()},
            {"int_G_squared", om.g_squared_integral},
            {"kernel", rms::to_json(kernel)},
            {"nodes", spec.quadrature.nodes}};
        *out_json = dup_string(result.dump(2));
    });
}

}  // extern "C"
