// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rms/rms.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitExperiment = 3;

int exit_code_for(rms_status s) {
    switch (s) {
        case RMS_OK: return kExitOk;
        case RMS_ERR_CONFIG:
        case RMS_ERR_INVALID_ARGUMENT:
        case RMS_ERR_IO: return kExitConfig;
        default: return kExitExperiment;
    }
}

int report_error(const char* what, rms_status s) {
    std::fprintf(stderr, "rms %s: %s\n", what, rms_last_error());
    return exit_code_for(s);
}

bool slurp(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

std::string take_string(char* s) {
    std::string out(s ? s : "");
    rms_string_free(s);
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, const std::string& format) {
    std::string text;
    if (!slurp(config_path, text)) {
        std::fprintf(stderr, "rms simulate: cannot read %s\n", config_path.c_str());
        return kExitConfig;
    }
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rms simulate: %s\n", e.what());
        return kExitConfig;
    }
    std::vector<std::string> formats;
    if (!format.empty()) {
        formats.push_back(format);
    } else if (cfg.contains("output") && cfg["output"].contains("formats")) {
        formats = cfg["output"]["formats"].get<std::vector<std::string>>();
    } else {
        formats = {"md"};
    }
    std::string dir = out_dir;
    if (dir.empty() && cfg.contains("output") && cfg["output"].contains("dir"))
        dir = cfg["output"]["dir"].get<std::string>();

    rms_report* report = nullptr;
    if (rms_status s = rms_simulate(text.c_str(), 0, &report); s != RMS_OK) return report_error("simulate", s);
    int rc = kExitOk;
    for (const std::string& f : formats) {
        if (dir.empty()) {
            char* rendered = nullptr;
            if (rms_status s = rms_report_render(report, f.c_str(), &rendered); s != RMS_OK) {
                rc = report_error("simulate", s);
                break;
            }
            std::fputs(take_string(rendered).c_str(), stdout);
        } else if (rms_status s = rms_report_write(report, dir.c_str(), f.c_str()); s != RMS_OK) {
            rc = report_error("simulate", s);
            break;
        }
    }
    rms_report_free(report);
    return rc;
}

int cmd_estimate(const std::string& data_path, const std::string& config_path) {
    std::string text;
    if (!slurp(config_path, text)) {
        std::fprintf(stderr, "rms estimate: cannot read %s\n", config_path.c_str());
        return kExitConfig;
    }
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rms estimate: %s\n", e.what());
        return kExitConfig;
    }
    // Either a bare estimator block or {"estimator":..., "seed":..., "theta0":...}.
    nlohmann::json est = cfg.contains("estimator") ? cfg["estimator"] : cfg;
    std::uint64_t seed = 0;
    std::vector<double> theta0;
    try {
        if (cfg.contains("estimator")) {
            seed = cfg.value("seed", std::uint64_t{0});
            if (cfg.contains("theta0")) theta0 = cfg["theta0"].get<std::vector<double>>();
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "rms estimate: %s\n", e.what());
        return kExitConfig;
    }

    rms_dataset* data = nullptr;
    if (rms_status s = rms_dataset_read_csv(data_path.c_str(), &data); s != RMS_OK) return report_error("estimate", s);
    size_t n = 0, J = 0, d = 0;
    rms_dataset_shape(data, &n, &J, &d);
    std::vector<double> theta(d);
    double q = 0.0;
    const std::string est_text = est.dump();
    rms_status s = rms_estimate(data, est_text.c_str(), seed, theta0.empty() ? nullptr : theta0.data(),
                                theta.data(), d, &q);
    rms_dataset_free(data);
    if (s != RMS_OK) return report_error("estimate", s);
    const nlohmann::json out = {{"n", n}, {"J", J}, {"d", d}, {"theta_hat", theta}, {"q_hat", q}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_diagnose(const std::string& config_path) {
    std::string text;
    if (!slurp(config_path, text)) {
        std::fprintf(stderr, "rms diagnose-v: cannot read %s\n", config_path.c_str());
        return kExitConfig;
    }
    char* out = nullptr;
    if (rms_status s = rms_diagnose_v(text.c_str(), &out); s != RMS_OK) return report_error("diagnose-v", s);
    std::cout << take_string(out) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ReLU-based maximum score estimation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rms_version()));

    std::string config, out_dir, format, data;
    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
    sim->add_option("--config", config, "Experiment config (JSON)")->required();
    sim->add_option("--out", out_dir, "Output directory (default: config output.dir, else stdout)");
    sim->add_option("--format", format, "Report format")->check(CLI::IsMember({"md", "csv", "json"}));

    auto* est = app.add_subcommand("estimate", "Estimate theta on a CSV dataset");
    est->add_option("--data", data, "Dataset CSV with header x_1_1..x_J_d,y")->required();
    est->add_option("--config", config, "Estimator config (JSON)")->required();

    auto* diag = app.add_subcommand("diagnose-v", "Compute the surface matrices V and Omega");
    diag->add_option("--config", config, "Diagnostic config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    if (*sim) return cmd_simulate(config, out_dir, format);
    if (*est) return cmd_estimate(data, config);
    return cmd_diagnose(config);
}
