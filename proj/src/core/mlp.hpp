#pragma once

// Fully connected ReLU network with a scalar affine output, trained by
// hand-written backpropagation. Parameters live in one flat vector so that
// the optimizers can treat them as a plain array.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rms {

class Rng;

struct MlpSpec {
    std::size_t hidden_width = 10;
    std::size_t hidden_layers = 2;
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    // Minibatch size; 0 means full batch.
    std::size_t batch = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

class Mlp {
public:
    // Activations recorded by a forward pass, reused by backward().
    struct Tape {
        std::vector<std::vector<double>> act;  // act[0] = input, act[l] = post-ReLU
        std::vector<std::vector<double>> pre;  // pre-activations per layer
    };

    Mlp() = default;
    Mlp(std::size_t input_dim, std::size_t hidden_width, std::size_t hidden_layers);

    std::size_t input_dim() const noexcept { return sizes_.empty() ? 0 : sizes_.front(); }
    std::size_t hidden_width() const noexcept { return sizes_.size() > 2 ? sizes_[1] : 0; }
    std::size_t hidden_layers() const noexcept { return sizes_.size() - 2; }
    std::size_t param_count() const noexcept { return params_.size(); }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    // Uniform He fan-in init for weights, zero biases.
    void init_he_uniform(Rng& rng);

    double forward(std::span<const double> x) const;
    double forward(std::span<const double> x, Tape& tape) const;
    // grad += upstream * d(output)/d(params), using the tape of the last forward.
    void backward(const Tape& tape, double upstream, std::span<double> grad) const;

    Tape make_tape() const;

private:
    std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
    std::size_t bias_offset(std::size_t layer) const {
        return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
    }

    std::vector<std::size_t> sizes_;    // input, hidden..., 1
    std::vector<std::size_t> offsets_;  // start of W_l in params_
    std::vector<double> params_;
};

// ADAM on a flat parameter vector. step() moves against grad.
class Adam {
public:
    Adam(std::size_t n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);

    void step(std::span<double> params, std::span<const double> grad);
    void set_learning_rate(double lr) { lr_ = lr; }
    std::size_t steps() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    double beta1_pow_ = 1.0, beta2_pow_ = 1.0;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace rms
