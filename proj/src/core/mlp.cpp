#include "core/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace rms {

void MlpSpec::validate() const {
    if (hidden_width == 0 || hidden_layers == 0)
        throw ConfigError("mlp: hidden width and depth must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("mlp: learning rate must be positive");
    if (epochs == 0) throw ConfigError("mlp: epochs must be positive");
}

Mlp::Mlp(std::size_t input_dim, std::size_t hidden_width, std::size_t hidden_layers) {
    if (input_dim == 0 || hidden_width == 0 || hidden_layers == 0)
        throw ConfigError("mlp: all layer sizes must be positive");
    sizes_.push_back(input_dim);
    for (std::size_t l = 0; l < hidden_layers; ++l) sizes_.push_back(hidden_width);
    sizes_.push_back(1);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        offsets_.push_back(total);
        total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.assign(total, 0.0);
}

void Mlp::init_he_uniform(Rng& rng) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double limit = std::sqrt(6.0 / static_cast<double>(sizes_[l]));
        double* w = params_.data() + weight_offset(l);
        for (std::size_t k = 0; k < sizes_[l] * sizes_[l + 1]; ++k) w[k] = rng.uniform(-limit, limit);
        std::fill_n(params_.data() + bias_offset(l), sizes_[l + 1], 0.0);
    }
}

Mlp::Tape Mlp::make_tape() const {
    Tape tape;
    tape.act.resize(sizes_.size());
    tape.pre.resize(sizes_.size());
    for (std::size_t l = 0; l < sizes_.size(); ++l) {
        tape.act[l].assign(sizes_[l], 0.0);
        tape.pre[l].assign(sizes_[l], 0.0);
    }
    return tape;
}

double Mlp::forward(std::span<const double> x) const {
    Tape tape = make_tape();
    return forward(x, tape);
}

double Mlp::forward(std::span<const double> x, Tape& tape) const {
    if (x.size() != input_dim()) throw ConfigError("mlp: input dimension mismatch");
    if (tape.act.size() != sizes_.size()) tape = make_tape();
    std::copy(x.begin(), x.end(), tape.act[0].begin());
    const std::size_t last = sizes_.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        const std::size_t in = sizes_[l], out = sizes_[l + 1];
        const double* w = params_.data() + weight_offset(l);
        const double* b = params_.data() + bias_offset(l);
        const double* a = tape.act[l].data();
        double* z = tape.pre[l + 1].data();
        double* next = tape.act[l + 1].data();
        for (std::size_t o = 0; o < out; ++o) {
            double s = b[o];
            const double* wr = w + o * in;
            for (std::size_t k = 0; k < in; ++k) s += wr[k] * a[k];
            z[o] = s;
            next[o] = (l + 1 == last) ? s : (s > 0.0 ? s : 0.0);
        }
    }
    return tape.act[last][0];
}

void Mlp::backward(const Tape& tape, double upstream, std::span<double> grad) const {
    const std::size_t last = sizes_.size() - 1;
    // delta holds dOut/dz for the current layer.
    std::vector<double> delta{upstream};
    std::vector<double> prev;
    for (std::size_t l = last; l-- > 0;) {
        const std::size_t in = sizes_[l], out = sizes_[l + 1];
        const double* w = params_.data() + weight_offset(l);
        double* gw = grad.data() + weight_offset(l);
        double* gb = grad.data() + bias_offset(l);
        const double* a = tape.act[l].data();
        for (std::size_t o = 0; o < out; ++o) {
            const double dz = delta[o];
            if (dz == 0.0) continue;
            gb[o] += dz;
            double* gwr = gw + o * in;
            for (std::size_t k = 0; k < in; ++k) gwr[k] += dz * a[k];
        }
        if (l == 0) break;
        prev.assign(in, 0.0);
        for (std::size_t o = 0; o < out; ++o) {
            const double dz = delta[o];
            if (dz == 0.0) continue;
            const double* wr = w + o * in;
            for (std::size_t k = 0; k < in; ++k) prev[k] += dz * wr[k];
        }
        // ReLU derivative, 0 at the kink.
        const double* z = tape.pre[l].data();
        for (std::size_t k = 0; k < in; ++k)
            if (!(z[k] > 0.0)) prev[k] = 0.0;
        delta.swap(prev);
    }
}

Adam::Adam(std::size_t n, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    ++t_;
    beta1_pow_ *= beta1_;
    beta2_pow_ *= beta2_;
    const double c1 = 1.0 - beta1_pow_;
    const double c2 = 1.0 - beta2_pow_;
    for (std::size_t k = 0; k < params.size(); ++k) {
        m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
        v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
        const double mhat = m_[k] / c1;
        const double vhat = v_[k] / c2;
        params[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

}  // namespace rms
