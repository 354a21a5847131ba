#pragma once

// Joint estimation of (theta, beta): an MLP head f_beta feeding the RMS/MISC
// layer, h_{theta,beta}(x) = g+(x; theta, beta) - g-(x; theta, beta), trained
// on squared error in three stages.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/criterion.hpp"
#include "core/dgp.hpp"
#include "core/direction.hpp"
#include "core/mlp.hpp"

namespace rms {

struct RmsLayerCache {
    double h = 0.0;
    IndexAggregate agg;
    bool plus_active = false;
    bool minus_active = false;
};

struct RmsLayerOutput {
    double g_plus = 0.0;
    double g_minus = 0.0;
    RmsLayerCache cache;
};

struct RmsLayerGrad {
    double dh = 0.0;
    std::vector<double> dtheta;
};

RmsLayerOutput rms_layer_forward(double h_val, std::span<const double> x_block,
                                 std::span<const double> theta, std::size_t J);

// Chain rule through the layer given dL/dg+ and dL/dg-; kink conventions match
// criterion_subgradient. dtheta is accumulated into `dtheta` when non-empty.
RmsLayerGrad rms_layer_backward(const RmsLayerCache& cache, std::span<const double> x_block,
                                std::size_t d, double upstream_plus, double upstream_minus);

struct RmsNetwork {
    Mlp mlp;
    std::vector<double> theta;
    std::size_t J = 1;
    std::size_t d = 0;

    RmsNetwork() = default;
    RmsNetwork(Mlp net, Direction theta, std::size_t J, std::size_t d);

    double forward(std::span<const double> x) const;
    // Network output with explicit theta (used for Lipschitz checks).
    double forward(std::span<const double> x, std::span<const double> theta_override) const;
    Direction direction() const { return normalize(theta); }
};

struct JointTrainConfig {
    MlpSpec mlp;  // architecture and minibatch size of f_beta
    std::size_t stage1_epochs = 100;
    std::size_t stage2_epochs = 200;
    std::size_t stage3_epochs = 100;
    double stage1_lr = 0.01;
    double stage2_lr = 0.01;
    double stage3_lr = 0.002;
    // Stage 2 restarts from this many uniform directions and keeps the lowest loss.
    std::size_t stage2_starts = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

struct JointFitResult {
    Direction theta_hat;
    RmsNetwork net;
    std::vector<double> stage1_loss, stage2_loss, stage3_loss;
    double final_loss = 0.0;
    double max_norm_deviation = 0.0;
};

double network_mse(const RmsNetwork& net, const Dataset& data);

// Mean squared error over `rows` and its gradient, accumulated into grad_beta
// (MLP parameters) and grad_theta. Returns the loss.
double network_loss_gradient(const RmsNetwork& net, const Dataset& data, std::span<const std::size_t> rows,
                             std::span<double> grad_beta, std::span<double> grad_theta);

// Stage 1: train f_beta alone against y_centered (theta branch bypassed).
std::vector<double> train_stage1(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config);
// Stage 2: beta frozen, theta re-drawn on the sphere and trained alone.
std::vector<double> train_stage2(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                                 double* max_norm_deviation = nullptr);
// Trains beta through the RMS layer for `epochs` at `lr`; theta moves too
// when update_theta is set.
std::vector<double> train_head(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                               std::size_t epochs, double lr, bool update_theta,
                               double* max_norm_deviation = nullptr);

// Stage 3: all parameters jointly.
std::vector<double> train_stage3(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                                 double* max_norm_deviation = nullptr);

JointFitResult joint_fit(const Dataset& data, const JointTrainConfig& config);
JointFitResult joint_fit(const Dataset& data, RmsNetwork net, const JointTrainConfig& config);

std::string checkpoint_json(const RmsNetwork& net, const JointTrainConfig& config);

}  // namespace rms
