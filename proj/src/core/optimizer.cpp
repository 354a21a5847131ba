#include "core/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"
#include "core/mlp.hpp"
#include "core/rng.hpp"

namespace rms {

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("optimizer: learning rate must be positive");
    if (epochs == 0) throw ConfigError("optimizer: epochs must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("optimizer: betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be positive");
    switch (init) {
        case InitKind::RandomSphere:
            if (n_starts == 0) throw ConfigError("optimizer: n_starts must be positive");
            break;
        case InitKind::Provided:
            if (init_points.size() != 1) throw ConfigError("optimizer: provided init needs one point");
            break;
        case InitKind::Warm:
            if (init_points.empty()) throw ConfigError("optimizer: warm init needs at least one point");
            break;
    }
}

std::vector<Direction> initial_points(const OptimizerConfig& config, std::size_t d) {
    std::vector<Direction> starts;
    if (config.init == InitKind::RandomSphere) {
        Rng rng(config.seed);
        std::vector<double> v(d);
        for (std::size_t s = 0; s < config.n_starts; ++s) {
            rng.on_sphere(v);
            starts.push_back(normalize(v));
        }
    } else {
        for (const auto& p : config.init_points) {
            if (p.size() != d) throw ConfigError("optimizer: init point has wrong dimension");
            starts.push_back(normalize(p));
        }
    }
    return starts;
}

OptResult ascend_from(const CriterionSpec& spec, const OptimizerConfig& config, const Direction& start,
                      std::size_t start_index) {
    const std::size_t d = spec.d();
    std::vector<double> theta(start.values().begin(), start.values().end());
    std::vector<double> grad(d), step(d);
    Adam adam(d, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    OptResult res;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const CriterionValue cv = criterion_with_subgradient(spec, theta, grad);
        if (config.record_trace) res.trace.push_back({start_index, epoch, cv.q, theta});
        if (config.tangent_projection) {
            const double radial = dot(grad, theta);
            for (std::size_t k = 0; k < d; ++k) grad[k] -= radial * theta[k];
        }
        // ADAM descends, so feed it the negated ascent direction.
        for (std::size_t k = 0; k < d; ++k) step[k] = -grad[k];
        adam.step(theta, step);
        for (double v : theta) {
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << "optimizer: non-finite iterate at epoch " << epoch << " of start " << start_index;
                throw NumericalError(msg.str());
            }
        }
        const double nrm = norm2(theta);
        for (double& v : theta) v /= nrm;
        res.max_norm_deviation = std::max(res.max_norm_deviation, std::abs(norm2(theta) - 1.0));
    }
    res.theta_hat = normalize(theta);
    res.q_hat = sample_criterion(spec, res.theta_hat).q;
    if (!std::isfinite(res.q_hat)) throw NumericalError("optimizer: non-finite final criterion");
    res.start_index = start_index;
    if (config.record_trace) res.trace.push_back({start_index, config.epochs, res.q_hat, res.theta_hat.vec()});
    return res;
}

OptResult projected_adam(const CriterionSpec& spec, const OptimizerConfig& config) {
    config.validate();
    const auto starts = initial_points(config, spec.d());
    OptResult best;
    bool have = false;
    std::vector<std::string> failures;
    std::vector<double> values;
    std::vector<TracePoint> trace;
    double max_dev = 0.0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        try {
            OptResult r = ascend_from(spec, config, starts[s], s);
            values.push_back(r.q_hat);
            max_dev = std::max(max_dev, r.max_norm_deviation);
            if (config.record_trace) trace.insert(trace.end(), r.trace.begin(), r.trace.end());
            if (!have || r.q_hat > best.q_hat) {
                best = std::move(r);
                have = true;
            }
        } catch (const NumericalError& e) {
            values.push_back(NAN);
            failures.emplace_back(e.what());
        }
    }
    if (!have) {
        std::ostringstream msg;
        msg << "optimizer: all " << starts.size() << " starts failed";
        for (const auto& f : failures) msg << "; " << f;
        throw NumericalError(msg.str());
    }
    best.start_values = std::move(values);
    best.trace = std::move(trace);
    best.max_norm_deviation = max_dev;
    return best;
}

}  // namespace rms
