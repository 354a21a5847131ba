#pragma once

// JSON <-> configuration structs. Field names follow the struct members.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/dgp.hpp"
#include "core/first_stage.hpp"
#include "core/joint_dnn.hpp"
#include "core/kernels.hpp"
#include "core/optimizer.hpp"

namespace rms {

enum class EstimatorKind {
    TwoStageKernel,
    TwoStageSeries,
    TwoStageMlp,
    TwoStageKernelRidge,
    TwoStageOracle,
    JointDnn,
};

std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::TwoStageKernel;
    KernelSpec kernel;
    SeriesSpec series;
    MlpSpec mlp;
    KernelRidgeSpec ridge;
    OptimizerConfig optimizer;
    JointTrainConfig joint;

    void validate() const;
};

struct ExperimentConfig {
    std::string label = "experiment";
    DgpSpec dgp;
    std::vector<std::size_t> sample_sizes;
    EstimatorConfig estimator;
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    std::string output_dir;
    std::vector<std::string> formats{"md", "csv", "json"};
    // Diagnostics only: flip theta_hat into the theta0 half-space before metrics.
    bool flip_sign = false;

    void validate() const;
};

DgpSpec dgp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DgpSpec& spec);
KernelSpec kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelSpec& spec);
SeriesSpec series_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SeriesSpec& spec);
MlpSpec mlp_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MlpSpec& spec);
KernelRidgeSpec ridge_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KernelRidgeSpec& spec);
OptimizerConfig optimizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptimizerConfig& config);
JointTrainConfig joint_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JointTrainConfig& config);
EstimatorConfig estimator_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EstimatorConfig& config);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

// Parses text, mapping JSON syntax/type errors to ConfigError.
nlohmann::json parse_json(const std::string& text);
nlohmann::json read_json_file(const std::string& path);

// Model dump: kind tag plus parameters. Kernel models reference the dataset
// by path instead of copying the training sample.
nlohmann::json model_dump(const FittedRegressor& model, const std::string& dataset_ref = "");

}  // namespace rms
