#include "core/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "core/criterion.hpp"
#include "core/error.hpp"
#include "core/first_stage.hpp"
#include "core/joint_dnn.hpp"
#include "core/optimizer.hpp"
#include "core/rng.hpp"

namespace rms {

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::size_t replication) {
    return derive_seed(splitmix64(master_seed) ^ static_cast<std::uint64_t>(n), replication, Stream::Data);
}

EstimateResult estimate(const Dataset& data, const EstimatorConfig& config, std::uint64_t rep_seed,
                        Design design, const Direction& theta0_for_oracle) {
    config.validate();
    auto first_stage_seed = [&](std::uint64_t own) { return derive_seed(rep_seed, own, Stream::FirstStage); };
    if (config.kind == EstimatorKind::JointDnn) {
        JointTrainConfig jc = config.joint;
        jc.seed = derive_seed(rep_seed, config.joint.seed, Stream::Joint);
        const JointFitResult r = joint_fit(data, jc);
        return {r.theta_hat, r.final_loss};
    }
    auto criterion = [&]() -> CriterionSpec {
        switch (config.kind) {
            case EstimatorKind::TwoStageKernel:
                return CriterionSpec::from_regressor(data, fit_kernel(data, config.kernel));
            case EstimatorKind::TwoStageSeries:
                return CriterionSpec::from_regressor(data, fit_series(data, config.series));
            case EstimatorKind::TwoStageMlp: {
                MlpSpec ms = config.mlp;
                ms.seed = first_stage_seed(config.mlp.seed);
                return CriterionSpec::from_regressor(data, fit_mlp(data, ms));
            }
            case EstimatorKind::TwoStageKernelRidge:
                return CriterionSpec::from_regressor(data, fit_kernel_ridge(data, config.ridge));
            case EstimatorKind::TwoStageOracle:
                return CriterionSpec::from_oracle(data, design, theta0_for_oracle);
            case EstimatorKind::JointDnn: break;
        }
        throw ConfigError("estimate: unsupported estimator");
    }();
    OptimizerConfig oc = config.optimizer;
    oc.seed = derive_seed(rep_seed, config.optimizer.seed, Stream::Optimizer);
    const OptResult r = projected_adam(criterion, oc);
    return {r.theta_hat, r.q_hat};
}

std::size_t worker_threads(std::size_t requested) {
    std::size_t n = requested > 0 ? requested : std::max<unsigned>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RMS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) n = std::min(n, static_cast<std::size_t>(v));
    }
    return n;
}

namespace {

struct RepOutcome {
    bool ok = false;
    std::vector<double> theta;
    std::string error;
    double seconds = 0.0;
};

}  // namespace

McReport run_experiment(const ExperimentConfig& config, std::size_t threads, const ProgressFn& progress) {
    config.validate();
    threads = worker_threads(threads);
    const Direction theta0 = config.dgp.theta();
    McReport report;
    report.label = config.label;
    report.estimator = to_string(config.estimator.kind);
    report.theta0 = theta0.vec();
    report.replications = config.replications;
    report.config = to_json(config);

    for (std::size_t n : config.sample_sizes) {
        const std::size_t B = config.replications;
        std::vector<RepOutcome> outcomes(B);
        std::atomic<std::size_t> next{0}, done{0};
        std::exception_ptr config_failure;
        std::mutex mu;
        auto worker = [&]() {
            for (;;) {
                const std::size_t r = next.fetch_add(1);
                if (r >= B) return;
                const auto t0 = std::chrono::steady_clock::now();
                RepOutcome& out = outcomes[r];
                try {
                    DgpSpec spec = config.dgp;
                    spec.n = n;
                    spec.seed = replication_seed(config.master_seed, n, r);
                    const Dataset data = generate(spec);
                    const EstimateResult est =
                        estimate(data, config.estimator, spec.seed, spec.design, theta0);
                    out.theta = est.theta_hat.vec();
                    if (config.flip_sign && dot(out.theta, theta0.values()) < 0.0)
                        for (double& v : out.theta) v = -v;
                    out.ok = true;
                } catch (const ConfigError&) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!config_failure) config_failure = std::current_exception();
                } catch (const std::exception& e) {
                    out.error = e.what();
                }
                out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                const std::size_t finished = done.fetch_add(1) + 1;
                if (progress) {
                    std::lock_guard<std::mutex> lock(mu);
                    progress(n, finished, B);
                }
            }
        };
        const std::size_t pool = std::min(threads, B);
        if (pool <= 1) {
            worker();
        } else {
            std::vector<std::thread> ts;
            for (std::size_t t = 0; t < pool; ++t) ts.emplace_back(worker);
            for (auto& t : ts) t.join();
        }
        if (config_failure) std::rethrow_exception(config_failure);

        CellReport cell;
        cell.n = n;
        for (std::size_t r = 0; r < B; ++r) {
            const RepOutcome& o = outcomes[r];
            cell.runtime_total_s += o.seconds;
            cell.runtime_max_s = std::max(cell.runtime_max_s, o.seconds);
            if (o.ok) {
                cell.replication_index.push_back(r);
                cell.estimates.push_back(o.theta);
            } else {
                cell.failures.push_back({r, o.error});
            }
        }
        cell.runtime_mean_s = cell.runtime_total_s / static_cast<double>(B);
        if (static_cast<double>(cell.failures.size()) > 0.05 * static_cast<double>(B) || cell.estimates.empty()) {
            std::ostringstream msg;
            msg << "experiment '" << config.label << "': " << cell.failures.size() << " of " << B
                << " replications failed at n = " << n;
            if (!cell.failures.empty()) msg << " (first: " << cell.failures.front().message << ")";
            throw ExperimentError(msg.str());
        }
        cell.metrics = compute_metrics(cell.estimates, theta0);
        report.cells.push_back(std::move(cell));
    }
    return report;
}

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "md" || name == "markdown") return ReportFormat::Markdown;
    if (name == "json") return ReportFormat::Json;
    throw ConfigError("unknown report format '" + name + "'");
}

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string subscript(std::size_t k) {
    static const char* digits[] = {"₀", "₁", "₂", "₃", "₄", "₅", "₆", "₇", "₈", "₉"};
    std::string s;
    for (char c : std::to_string(k)) s += digits[c - '0'];
    return s;
}

struct Row {
    std::string label;   // table label
    std::string key;     // csv key
    bool fine;           // six decimals instead of five
    double (*get)(const MetricBlock&, std::size_t);
    std::size_t k;
};

std::vector<Row> metric_rows(std::size_t d) {
    std::vector<Row> rows;
    auto add = [&](const char* name, const char* key, double (*get)(const MetricBlock&, std::size_t)) {
        for (std::size_t k = 0; k < d; ++k)
            rows.push_back({std::string(name) + " of θ" + subscript(k + 1),
                            std::string(key) + "_theta_" + std::to_string(k + 1), false, get, k});
    };
    add("MSE", "mse", [](const MetricBlock& m, std::size_t k) { return m.mse[k]; });
    add("Bias", "bias", [](const MetricBlock& m, std::size_t k) { return m.bias[k]; });
    add("SD", "sd", [](const MetricBlock& m, std::size_t k) { return m.sd[k]; });
    add("L1 Error", "l1_error", [](const MetricBlock& m, std::size_t k) { return m.l1_error[k]; });
    rows.push_back({"L2 Norm of Bias", "l2_norm_bias", true,
                    [](const MetricBlock& m, std::size_t) { return m.l2_norm_bias; }, 0});
    rows.push_back({"1-- Mean Angular Similarity", "one_minus_mean_angular_similarity", true,
                    [](const MetricBlock& m, std::size_t) { return m.one_minus_mean_ang; }, 0});
    rows.push_back({"1-- Median Angular Similarity", "one_minus_median_angular_similarity", true,
                    [](const MetricBlock& m, std::size_t) { return m.one_minus_median_ang; }, 0});
    return rows;
}

}  // namespace

std::string render_markdown(const McReport& report) {
    std::ostringstream out;
    out << "## " << report.label << " (" << report.estimator << ", B=" << report.replications << ")\n\n";
    out << "| Metric |";
    for (const auto& c : report.cells) out << " N=" << c.n << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < report.cells.size(); ++i) out << "---|";
    out << "\n";
    for (const Row& row : metric_rows(report.theta0.size())) {
        out << "| " << row.label << " |";
        for (const auto& c : report.cells) out << " " << fmt(row.fine ? "%.6f" : "%.5f", row.get(c.metrics, row.k)) << " |";
        out << "\n";
    }
    bool any_flag = false;
    for (const auto& c : report.cells) {
        if (!c.failures.empty()) {
            out << "\nN=" << c.n << ": " << c.failures.size() << " failed replication(s) excluded.";
            any_flag = true;
        }
        if (!c.metrics.sd_defined) {
            out << "\nN=" << c.n << ": SD undefined for a single replication, reported as 0.";
            any_flag = true;
        }
    }
    if (any_flag) out << "\n";
    return out.str();
}

std::string render_csv(const McReport& report) {
    std::ostringstream out;
    out << "metric,n,value\n";
    for (const auto& c : report.cells) {
        for (const Row& row : metric_rows(report.theta0.size()))
            out << row.key << "," << c.n << "," << fmt("%.17g", row.get(c.metrics, row.k)) << "\n";
        out << "replications_ok," << c.n << "," << c.estimates.size() << "\n";
        out << "replications_failed," << c.n << "," << c.failures.size() << "\n";
    }
    return out.str();
}

nlohmann::json report_to_json(const McReport& report) {
    using nlohmann::json;
    json cells = json::array();
    for (const auto& c : report.cells) {
        json failures = json::array();
        for (const auto& f : c.failures) failures.push_back({{"replication", f.replication}, {"message", f.message}});
        const MetricBlock& m = c.metrics;
        cells.push_back({{"n", c.n},
                         {"replication_index", c.replication_index},
                         {"estimates", c.estimates},
                         {"failures", failures},
                         {"metrics",
                          {{"mse", m.mse},
                           {"bias", m.bias},
                           {"sd", m.sd},
                           {"l1_error", m.l1_error},
                           {"l2_norm_bias", m.l2_norm_bias},
                           {"one_minus_mean_ang", m.one_minus_mean_ang},
                           {"one_minus_median_ang", m.one_minus_median_ang},
                           {"sd_defined", m.sd_defined},
                           {"count", m.count}}},
                         {"runtime", {{"total_s", c.runtime_total_s}, {"mean_s", c.runtime_mean_s}, {"max_s", c.runtime_max_s}}}});
    }
    return {{"label", report.label},   {"estimator", report.estimator},
            {"theta0", report.theta0}, {"replications", report.replications},
            {"cells", cells},          {"config", report.config}};
}

McReport report_from_json(const nlohmann::json& j) {
    try {
        McReport r;
        r.label = j.at("label").get<std::string>();
        r.estimator = j.at("estimator").get<std::string>();
        r.theta0 = j.at("theta0").get<std::vector<double>>();
        r.replications = j.at("replications").get<std::size_t>();
        r.config = j.at("config");
        for (const auto& cj : j.at("cells")) {
            CellReport c;
            c.n = cj.at("n").get<std::size_t>();
            c.replication_index = cj.at("replication_index").get<std::vector<std::size_t>>();
            c.estimates = cj.at("estimates").get<std::vector<std::vector<double>>>();
            for (const auto& f : cj.at("failures"))
                c.failures.push_back({f.at("replication").get<std::size_t>(), f.at("message").get<std::string>()});
            const auto& m = cj.at("metrics");
            c.metrics.mse = m.at("mse").get<std::vector<double>>();
            c.metrics.bias = m.at("bias").get<std::vector<double>>();
            c.metrics.sd = m.at("sd").get<std::vector<double>>();
            c.metrics.l1_error = m.at("l1_error").get<std::vector<double>>();
            c.metrics.l2_norm_bias = m.at("l2_norm_bias").get<double>();
            c.metrics.one_minus_mean_ang = m.at("one_minus_mean_ang").get<double>();
            c.metrics.one_minus_median_ang = m.at("one_minus_median_ang").get<double>();
            c.metrics.sd_defined = m.at("sd_defined").get<bool>();
            c.metrics.count = m.at("count").get<std::size_t>();
            const auto& rt = cj.at("runtime");
            c.runtime_total_s = rt.at("total_s").get<double>();
            c.runtime_mean_s = rt.at("mean_s").get<double>();
            c.runtime_max_s = rt.at("max_s").get<double>();
            r.cells.push_back(std::move(c));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("report JSON: ") + e.what());
    }
}

std::string render(const McReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Csv: return render_csv(report);
        case ReportFormat::Markdown: return render_markdown(report);
        case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
    }
    return {};
}

std::string emit_report(const McReport& report, ReportFormat format, const std::string& dir) {
    namespace fs = std::filesystem;
    const char* ext = format == ReportFormat::Csv ? "csv" : format == ReportFormat::Markdown ? "md" : "json";
    std::error_code ec;
    fs::create_directories(dir.empty() ? fs::path(".") : fs::path(dir), ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path path = (dir.empty() ? fs::path(".") : fs::path(dir)) / (report.label + "." + ext);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << render(report, format);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    return path.string();
}

}  // namespace rms
