#include "core/joint_dnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rms {

RmsLayerOutput rms_layer_forward(double h_val, std::span<const double> x_block,
                                 std::span<const double> theta, std::size_t J) {
    RmsLayerOutput out;
    out.cache.h = h_val;
    out.cache.agg = aggregate_indexes(theta, x_block, J);
    const double plus_arg = h_val - out.cache.agg.u;
    const double minus_arg = -h_val - out.cache.agg.v;
    out.cache.plus_active = plus_arg > 0.0;
    out.cache.minus_active = minus_arg > 0.0;
    out.g_plus = relu(plus_arg);
    out.g_minus = relu(minus_arg);
    return out;
}

RmsLayerGrad rms_layer_backward(const RmsLayerCache& cache, std::span<const double> x_block,
                                std::size_t d, double upstream_plus, double upstream_minus) {
    RmsLayerGrad g;
    g.dtheta.assign(d, 0.0);
    if (cache.plus_active) {
        g.dh += upstream_plus;
        if (-cache.agg.s_u > 0.0) {
            const double* xj = x_block.data() + cache.agg.u_arg * d;
            for (std::size_t k = 0; k < d; ++k) g.dtheta[k] += upstream_plus * xj[k];
        }
    }
    if (cache.minus_active) {
        g.dh -= upstream_minus;
        if (cache.agg.s_v > 0.0) {
            const double* xj = x_block.data() + cache.agg.v_arg * d;
            for (std::size_t k = 0; k < d; ++k) g.dtheta[k] -= upstream_minus * xj[k];
        }
    }
    return g;
}

RmsNetwork::RmsNetwork(Mlp net, Direction dir, std::size_t J_, std::size_t d_)
    : mlp(std::move(net)), theta(dir.vec()), J(J_), d(d_) {
    if (theta.size() != d || mlp.input_dim() != J * d)
        throw ConfigError("rms network: dimensions of theta and the MLP input disagree");
}

double RmsNetwork::forward(std::span<const double> x) const { return forward(x, theta); }

double RmsNetwork::forward(std::span<const double> x, std::span<const double> th) const {
    const RmsLayerOutput o = rms_layer_forward(mlp.forward(x), x, th, J);
    return o.g_plus - o.g_minus;
}

void JointTrainConfig::validate() const {
    mlp.validate();
    if (stage1_epochs == 0 || stage2_epochs == 0 || stage3_epochs == 0)
        throw ConfigError("joint: every stage needs a positive epoch count");
    if (!(stage1_lr > 0.0) || !(stage2_lr > 0.0) || !(stage3_lr > 0.0))
        throw ConfigError("joint: learning rates must be positive");
    if (stage2_starts == 0) throw ConfigError("joint: stage2_starts must be positive");
}

double network_mse(const RmsNetwork& net, const Dataset& data) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const double r = net.forward(data.row(i)) - data.y_centered[i];
        s += r * r;
    }
    return s / static_cast<double>(data.n);
}

namespace {

std::size_t batch_size(const JointTrainConfig& c, std::size_t n) {
    return (c.mlp.batch == 0 || c.mlp.batch >= n) ? n : c.mlp.batch;
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
}

void check_loss(double loss, const char* stage, std::size_t epoch) {
    if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "joint: non-finite loss in " << stage << " at epoch " << epoch << " (loss " << loss << ")";
        throw NumericalError(msg.str());
    }
}

double renormalize(std::vector<double>& theta) {
    const double n = norm2(theta);
    if (!(n > 1e-12) || !std::isfinite(n)) throw NumericalError("joint: theta collapsed to zero");
    for (double& v : theta) v /= n;
    return std::abs(norm2(theta) - 1.0);
}

}  // namespace

std::vector<double> train_stage1(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config) {
    Rng rng(derive_seed(config.seed, 1, Stream::Joint));
    const std::size_t n = data.n;
    const std::size_t batch = batch_size(config, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(net.mlp.param_count());
    Adam adam(grad.size(), config.stage1_lr);
    Mlp::Tape tape = net.mlp.make_tape();
    std::vector<double> history;
    for (std::size_t epoch = 0; epoch < config.stage1_epochs; ++epoch) {
        if (batch < n) shuffle(order, rng);
        double loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const double scale = 2.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                const double r = net.mlp.forward(data.row(i), tape) - data.y_centered[i];
                loss += r * r;
                net.mlp.backward(tape, scale * r, grad);
            }
            adam.step(net.mlp.params(), grad);
        }
        loss /= static_cast<double>(n);
        check_loss(loss, "stage 1", epoch);
        history.push_back(loss);
    }
    return history;
}

std::vector<double> train_stage2(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                                 double* max_norm_deviation) {
    const std::size_t n = data.n, d = data.d;
    // f_beta is frozen, so its outputs are computed once.
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = net.mlp.forward(data.row(i));
    auto full_loss = [&](std::span<const double> th) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const RmsLayerOutput o = rms_layer_forward(f[i], data.row(i), th, data.J);
            const double r = o.g_plus - o.g_minus - data.y_centered[i];
            s += r * r;
        }
        return s / static_cast<double>(n);
    };

    Rng rng(derive_seed(config.seed, 2, Stream::Joint));
    const std::size_t batch = batch_size(config, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> best_theta, best_history, grad(d);
    double best_loss = INFINITY, max_dev = 0.0;
    for (std::size_t s = 0; s < config.stage2_starts; ++s) {
        std::vector<double> theta(d);
        rng.on_sphere(theta);
        Adam adam(d, config.stage2_lr);
        std::vector<double> history;
        for (std::size_t epoch = 0; epoch < config.stage2_epochs; ++epoch) {
            if (batch < n) shuffle(order, rng);
            double loss = 0.0;
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t stop = std::min(n, start + batch);
                const double scale = 2.0 / static_cast<double>(stop - start);
                std::fill(grad.begin(), grad.end(), 0.0);
                for (std::size_t b = start; b < stop; ++b) {
                    const std::size_t i = order[b];
                    const auto row = data.row(i);
                    const RmsLayerOutput o = rms_layer_forward(f[i], row, theta, data.J);
                    const double r = o.g_plus - o.g_minus - data.y_centered[i];
                    loss += r * r;
                    const RmsLayerGrad g = rms_layer_backward(o.cache, row, d, scale * r, -scale * r);
                    for (std::size_t k = 0; k < d; ++k) grad[k] += g.dtheta[k];
                }
                adam.step(theta, grad);
                max_dev = std::max(max_dev, renormalize(theta));
            }
            loss /= static_cast<double>(n);
            check_loss(loss, "stage 2", epoch);
            history.push_back(loss);
        }
        const double final_loss = full_loss(theta);
        if (final_loss < best_loss) {
            best_loss = final_loss;
            best_theta = theta;
            best_history = std::move(history);
        }
    }
    net.theta = best_theta;
    if (max_norm_deviation) *max_norm_deviation = std::max(*max_norm_deviation, max_dev);
    return best_history;
}

double network_loss_gradient(const RmsNetwork& net, const Dataset& data, std::span<const std::size_t> rows,
                             std::span<double> grad_beta, std::span<double> grad_theta) {
    const std::size_t d = data.d;
    const double scale = 2.0 / static_cast<double>(rows.size());
    Mlp::Tape tape = net.mlp.make_tape();
    double loss = 0.0;
    for (std::size_t i : rows) {
        const auto row = data.row(i);
        const double fv = net.mlp.forward(row, tape);
        const RmsLayerOutput o = rms_layer_forward(fv, row, net.theta, data.J);
        const double r = o.g_plus - o.g_minus - data.y_centered[i];
        loss += r * r;
        const RmsLayerGrad g = rms_layer_backward(o.cache, row, d, scale * r, -scale * r);
        for (std::size_t k = 0; k < d; ++k) grad_theta[k] += g.dtheta[k];
        if (g.dh != 0.0) net.mlp.backward(tape, g.dh, grad_beta);
    }
    return loss / static_cast<double>(rows.size());
}

std::vector<double> train_head(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                               std::size_t epochs, double lr, bool update_theta, double* max_norm_deviation) {
    Rng rng(derive_seed(config.seed, 3, Stream::Joint));
    const std::size_t n = data.n, d = data.d;
    const std::size_t batch = batch_size(config, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad_beta(net.mlp.param_count()), grad_theta(d);
    Adam adam_beta(grad_beta.size(), lr);
    Adam adam_theta(d, lr);
    std::vector<double> history;
    double max_dev = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        if (batch < n) shuffle(order, rng);
        double loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            std::fill(grad_beta.begin(), grad_beta.end(), 0.0);
            std::fill(grad_theta.begin(), grad_theta.end(), 0.0);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            loss += network_loss_gradient(net, data, rows, grad_beta, grad_theta) *
                    static_cast<double>(stop - start);
            adam_beta.step(net.mlp.params(), grad_beta);
            if (update_theta) {
                adam_theta.step(net.theta, grad_theta);
                max_dev = std::max(max_dev, renormalize(net.theta));
            }
        }
        loss /= static_cast<double>(n);
        check_loss(loss, update_theta ? "stage 3" : "head training", epoch);
        history.push_back(loss);
    }
    if (max_norm_deviation) *max_norm_deviation = std::max(*max_norm_deviation, max_dev);
    return history;
}

std::vector<double> train_stage3(RmsNetwork& net, const Dataset& data, const JointTrainConfig& config,
                                 double* max_norm_deviation) {
    return train_head(net, data, config, config.stage3_epochs, config.stage3_lr, true, max_norm_deviation);
}

JointFitResult joint_fit(const Dataset& data, RmsNetwork net, const JointTrainConfig& config) {
    config.validate();
    data.validate();
    if (net.J != data.J || net.d != data.d) throw ConfigError("joint: network shape does not match data");
    JointFitResult res;
    res.stage1_loss = train_stage1(net, data, config);
    res.stage2_loss = train_stage2(net, data, config, &res.max_norm_deviation);
    res.stage3_loss = train_stage3(net, data, config, &res.max_norm_deviation);
    res.final_loss = network_mse(net, data);
    res.theta_hat = net.direction();
    res.net = std::move(net);
    return res;
}

JointFitResult joint_fit(const Dataset& data, const JointTrainConfig& config) {
    config.validate();
    data.validate();
    Rng rng(derive_seed(config.seed, 0, Stream::Joint));
    Mlp mlp(data.width(), config.mlp.hidden_width, config.mlp.hidden_layers);
    mlp.init_he_uniform(rng);
    // Placeholder direction; stage 1 never reads theta and stage 2 redraws it.
    std::vector<double> e1(data.d, 0.0);
    e1[0] = 1.0;
    return joint_fit(data, RmsNetwork(std::move(mlp), normalize(e1), data.J, data.d), config);
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string checkpoint_json(const RmsNetwork& net, const JointTrainConfig& config) {
    nlohmann::json cfg = {
        {"hidden_width", config.mlp.hidden_width}, {"hidden_layers", config.mlp.hidden_layers},
        {"batch", config.mlp.batch},               {"stage1_epochs", config.stage1_epochs},
        {"stage2_epochs", config.stage2_epochs},   {"stage3_epochs", config.stage3_epochs},
        {"stage1_lr", config.stage1_lr},           {"stage2_lr", config.stage2_lr},
        {"stage3_lr", config.stage3_lr},           {"stage2_starts", config.stage2_starts},
        {"seed", config.seed}};
    std::ostringstream hash;
    hash << std::hex << fnv1a(cfg.dump());
    nlohmann::json j = {{"kind", "rms_network"},
                        {"J", net.J},
                        {"d", net.d},
                        {"input_dim", net.mlp.input_dim()},
                        {"hidden_width", net.mlp.hidden_width()},
                        {"hidden_layers", net.mlp.hidden_layers()},
                        {"weights", std::vector<double>(net.mlp.params().begin(), net.mlp.params().end())},
                        {"theta", net.theta},
                        {"config", cfg},
                        {"config_hash", hash.str()}};
    return j.dump(2);
}

}  // namespace rms
