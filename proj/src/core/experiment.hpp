#pragma once

// Monte Carlo driver: for every sample size and replication, simulate,
// estimate, and aggregate the metrics. Replications run on a worker pool and
// are aggregated in replication order.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/config.hpp"
#include "core/metrics.hpp"

namespace rms {

struct ReplicationFailure {
    std::size_t replication = 0;
    std::string message;

    bool operator==(const ReplicationFailure&) const = default;
};

struct CellReport {
    std::size_t n = 0;
    std::vector<std::size_t> replication_index;  // of each successful estimate
    std::vector<std::vector<double>> estimates;
    std::vector<ReplicationFailure> failures;
    MetricBlock metrics;
    double runtime_total_s = 0.0;
    double runtime_mean_s = 0.0;
    double runtime_max_s = 0.0;

    bool operator==(const CellReport&) const = default;
};

struct McReport {
    std::string label;
    std::string estimator;
    std::vector<double> theta0;
    std::size_t replications = 0;
    std::vector<CellReport> cells;
    nlohmann::json config;

    bool operator==(const McReport&) const = default;
};

struct EstimateResult {
    Direction theta_hat;
    double q_hat = 0.0;  // criterion value (two-stage) or training MSE (joint)
};

// One estimation on a given dataset. `replication_seed` feeds the first-stage
// and optimizer streams.
EstimateResult estimate(const Dataset& data, const EstimatorConfig& config, std::uint64_t replication_seed,
                        Design design, const Direction& theta0_for_oracle);

// Seed of the dataset for (master_seed, n, replication).
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::size_t replication);

// Worker count: `requested` (0 = hardware concurrency), capped by RMS_THREADS.
std::size_t worker_threads(std::size_t requested = 0);

using ProgressFn = std::function<void(std::size_t n, std::size_t done, std::size_t total)>;

McReport run_experiment(const ExperimentConfig& config, std::size_t threads = 0,
                        const ProgressFn& progress = {});

enum class ReportFormat { Csv, Markdown, Json };
ReportFormat report_format_from_string(const std::string& name);

std::string render_markdown(const McReport& report);
std::string render_csv(const McReport& report);
nlohmann::json report_to_json(const McReport& report);
McReport report_from_json(const nlohmann::json& j);
std::string render(const McReport& report, ReportFormat format);

// Writes <dir>/<label>.<ext>; returns the path. Throws IoError.
std::string emit_report(const McReport& report, ReportFormat format, const std::string& dir);

}  // namespace rms
