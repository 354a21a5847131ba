#include "core/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "core/error.hpp"

namespace rms {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* a) { return it.key() == a; });
        if (!ok) throw ConfigError(std::string(where) + ": unknown field '" + it.key() + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const char* where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + "." + key + ": " + e.what());
    }
}

template <class T>
void read_optional(const json& j, const char* key, std::optional<T>& out, const char* where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    T v{};
    read(j, key, v, where);
    out = v;
}

std::string json_string(const json& j, const char* key, const char* where, std::string fallback) {
    read(j, key, fallback, where);
    return fallback;
}

}  // namespace

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::TwoStageKernel: return "two_stage_kernel";
        case EstimatorKind::TwoStageSeries: return "two_stage_series";
        case EstimatorKind::TwoStageMlp: return "two_stage_mlp";
        case EstimatorKind::TwoStageKernelRidge: return "two_stage_kernel_ridge";
        case EstimatorKind::TwoStageOracle: return "two_stage_oracle";
        case EstimatorKind::JointDnn: return "joint_dnn";
    }
    return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    for (auto k : {EstimatorKind::TwoStageKernel, EstimatorKind::TwoStageSeries, EstimatorKind::TwoStageMlp,
                   EstimatorKind::TwoStageKernelRidge, EstimatorKind::TwoStageOracle, EstimatorKind::JointDnn})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown estimator type '" + name + "'");
}

void EstimatorConfig::validate() const {
    switch (kind) {
        case EstimatorKind::TwoStageKernel: kernel.validate(); break;
        case EstimatorKind::TwoStageSeries: series.validate(); break;
        case EstimatorKind::TwoStageMlp: mlp.validate(); break;
        case EstimatorKind::TwoStageKernelRidge: ridge.validate(); break;
        case EstimatorKind::TwoStageOracle: break;
        case EstimatorKind::JointDnn: joint.validate(); return;
    }
    optimizer.validate();
}

void ExperimentConfig::validate() const {
    if (replications == 0) throw ConfigError("experiment: replications must be at least 1");
    if (sample_sizes.empty()) throw ConfigError("experiment: need at least one sample size");
    for (std::size_t n : sample_sizes) {
        DgpSpec s = dgp;
        s.n = n;
        s.validate();
    }
    estimator.validate();
    for (const auto& f : formats)
        if (f != "md" && f != "csv" && f != "json") throw ConfigError("experiment: unknown format '" + f + "'");
}

DgpSpec dgp_from_json(const json& j) {
    check_keys(j, "dgp", {"design", "n", "theta0", "d", "covariate_low", "covariate_high", "seed"});
    DgpSpec s;
    s.design = design_from_string(json_string(j, "design", "dgp", "single_index"));
    if (auto it = j.find("n"); it != j.end() && it->is_number_unsigned()) s.n = it->get<std::size_t>();
    read(j, "d", s.d, "dgp");
    read(j, "theta0", s.theta0, "dgp");
    if (s.theta0.empty()) {
        if (s.d != 3) throw ConfigError("dgp: theta0 is required when d != 3");
        s.theta0 = default_theta0();
    }
    if (j.find("d") == j.end()) s.d = s.theta0.size();
    read(j, "covariate_low", s.covariate_low, "dgp");
    read(j, "covariate_high", s.covariate_high, "dgp");
    read(j, "seed", s.seed, "dgp");
    return s;
}

json to_json(const DgpSpec& s) {
    return {{"design", to_string(s.design)}, {"n", s.n},
            {"theta0", s.theta0},           {"d", s.d},
            {"covariate_low", s.covariate_low}, {"covariate_high", s.covariate_high},
            {"seed", s.seed}};
}

KernelSpec kernel_from_json(const json& j) {
    check_keys(j, "kernel", {"family", "order", "bandwidth", "rule_constant", "rule_exponent", "undersmooth"});
    KernelSpec k;
    k.family = kernel_family_from_string(json_string(j, "family", "kernel", "gaussian"));
    read(j, "order", k.order, "kernel");
    read_optional(j, "bandwidth", k.bandwidth, "kernel");
    read(j, "rule_constant", k.rule_constant, "kernel");
    read_optional(j, "rule_exponent", k.rule_exponent, "kernel");
    read(j, "undersmooth", k.undersmooth, "kernel");
    k.validate();
    return k;
}

json to_json(const KernelSpec& k) {
    json j = {{"family", to_string(k.family)}, {"order", k.order}, {"rule_constant", k.rule_constant},
              {"undersmooth", k.undersmooth}};
    j["bandwidth"] = k.bandwidth ? json(*k.bandwidth) : json(nullptr);
    j["rule_exponent"] = k.rule_exponent ? json(*k.rule_exponent) : json(nullptr);
    return j;
}

SeriesSpec series_from_json(const json& j) {
    check_keys(j, "series", {"basis", "per_dim_degree"});
    SeriesSpec s;
    s.univariate_basis = series_basis_from_string(json_string(j, "basis", "series", "legendre"));
    read(j, "per_dim_degree", s.per_dim_degree, "series");
    s.validate();
    return s;
}

json to_json(const SeriesSpec& s) {
    return {{"basis", to_string(s.univariate_basis)}, {"per_dim_degree", s.per_dim_degree}};
}

MlpSpec mlp_from_json(const json& j) {
    check_keys(j, "mlp", {"hidden_width", "hidden_layers", "learning_rate", "epochs", "batch", "seed"});
    MlpSpec m;
    read(j, "hidden_width", m.hidden_width, "mlp");
    read(j, "hidden_layers", m.hidden_layers, "mlp");
    read(j, "learning_rate", m.learning_rate, "mlp");
    read(j, "epochs", m.epochs, "mlp");
    read(j, "batch", m.batch, "mlp");
    read(j, "seed", m.seed, "mlp");
    m.validate();
    return m;
}

json to_json(const MlpSpec& m) {
    return {{"hidden_width", m.hidden_width}, {"hidden_layers", m.hidden_layers},
            {"learning_rate", m.learning_rate}, {"epochs", m.epochs},
            {"batch", m.batch}, {"seed", m.seed}};
}

KernelRidgeSpec ridge_from_json(const json& j) {
    check_keys(j, "kernel_ridge", {"alpha", "gamma", "degree", "coef0"});
    KernelRidgeSpec r;
    read(j, "alpha", r.alpha, "kernel_ridge");
    read(j, "gamma", r.gamma, "kernel_ridge");
    read(j, "degree", r.degree, "kernel_ridge");
    read(j, "coef0", r.coef0, "kernel_ridge");
    r.validate();
    return r;
}

json to_json(const KernelRidgeSpec& r) {
    return {{"alpha", r.alpha}, {"gamma", r.gamma}, {"degree", r.degree}, {"coef0", r.coef0}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    check_keys(j, "optimizer", {"learning_rate", "epochs", "beta1", "beta2", "epsilon", "n_starts", "init",
                                "init_points", "tangent_projection", "record_trace", "seed"});
    OptimizerConfig c;
    read(j, "learning_rate", c.learning_rate, "optimizer");
    read(j, "epochs", c.epochs, "optimizer");
    read(j, "beta1", c.beta1, "optimizer");
    read(j, "beta2", c.beta2, "optimizer");
    read(j, "epsilon", c.epsilon, "optimizer");
    read(j, "n_starts", c.n_starts, "optimizer");
    const std::string init = json_string(j, "init", "optimizer", "random_sphere");
    if (init == "random_sphere") c.init = InitKind::RandomSphere;
    else if (init == "provided") c.init = InitKind::Provided;
    else if (init == "warm") c.init = InitKind::Warm;
    else throw ConfigError("optimizer: unknown init '" + init + "'");
    read(j, "init_points", c.init_points, "optimizer");
    read(j, "tangent_projection", c.tangent_projection, "optimizer");
    read(j, "record_trace", c.record_trace, "optimizer");
    read(j, "seed", c.seed, "optimizer");
    c.validate();
    return c;
}

json to_json(const OptimizerConfig& c) {
    const char* init = c.init == InitKind::RandomSphere ? "random_sphere"
                       : c.init == InitKind::Provided   ? "provided"
                                                        : "warm";
    return {{"learning_rate", c.learning_rate}, {"epochs", c.epochs},
            {"beta1", c.beta1},                 {"beta2", c.beta2},
            {"epsilon", c.epsilon},             {"n_starts", c.n_starts},
            {"init", init},                     {"init_points", c.init_points},
            {"tangent_projection", c.tangent_projection}, {"record_trace", c.record_trace},
            {"seed", c.seed}};
}

JointTrainConfig joint_from_json(const json& j) {
    check_keys(j, "joint", {"mlp", "stage1_epochs", "stage2_epochs", "stage3_epochs", "stage1_lr", "stage2_lr",
                            "stage3_lr", "stage2_starts", "seed"});
    JointTrainConfig c;
    if (auto it = j.find("mlp"); it != j.end()) c.mlp = mlp_from_json(*it);
    read(j, "stage1_epochs", c.stage1_epochs, "joint");
    read(j, "stage2_epochs", c.stage2_epochs, "joint");
    read(j, "stage3_epochs", c.stage3_epochs, "joint");
    read(j, "stage1_lr", c.stage1_lr, "joint");
    read(j, "stage2_lr", c.stage2_lr, "joint");
    read(j, "stage3_lr", c.stage3_lr, "joint");
    read(j, "stage2_starts", c.stage2_starts, "joint");
    read(j, "seed", c.seed, "joint");
    c.validate();
    return c;
}

json to_json(const JointTrainConfig& c) {
    return {{"mlp", to_json(c.mlp)},
            {"stage1_epochs", c.stage1_epochs}, {"stage2_epochs", c.stage2_epochs},
            {"stage3_epochs", c.stage3_epochs}, {"stage1_lr", c.stage1_lr},
            {"stage2_lr", c.stage2_lr},         {"stage3_lr", c.stage3_lr},
            {"stage2_starts", c.stage2_starts}, {"seed", c.seed}};
}

EstimatorConfig estimator_from_json(const json& j) {
    check_keys(j, "estimator", {"type", "kernel", "series", "mlp", "kernel_ridge", "optimizer", "joint"});
    EstimatorConfig e;
    e.kind = estimator_kind_from_string(json_string(j, "type", "estimator", "two_stage_kernel"));
    if (auto it = j.find("kernel"); it != j.end()) e.kernel = kernel_from_json(*it);
    if (auto it = j.find("series"); it != j.end()) e.series = series_from_json(*it);
    if (auto it = j.find("mlp"); it != j.end()) e.mlp = mlp_from_json(*it);
    if (auto it = j.find("kernel_ridge"); it != j.end()) e.ridge = ridge_from_json(*it);
    if (auto it = j.find("optimizer"); it != j.end()) e.optimizer = optimizer_from_json(*it);
    if (auto it = j.find("joint"); it != j.end()) e.joint = joint_from_json(*it);
    e.validate();
    return e;
}

json to_json(const EstimatorConfig& e) {
    json j = {{"type", to_string(e.kind)}};
    switch (e.kind) {
        case EstimatorKind::TwoStageKernel: j["kernel"] = to_json(e.kernel); break;
        case EstimatorKind::TwoStageSeries: j["series"] = to_json(e.series); break;
        case EstimatorKind::TwoStageMlp: j["mlp"] = to_json(e.mlp); break;
        case EstimatorKind::TwoStageKernelRidge: j["kernel_ridge"] = to_json(e.ridge); break;
        case EstimatorKind::TwoStageOracle: break;
        case EstimatorKind::JointDnn: j["joint"] = to_json(e.joint); return j;
    }
    j["optimizer"] = to_json(e.optimizer);
    return j;
}

ExperimentConfig experiment_from_json(const json& j) {
    check_keys(j, "config", {"label", "dgp", "estimator", "replications", "master_seed", "output", "flip_sign"});
    ExperimentConfig c;
    read(j, "label", c.label, "config");
    auto dgp = j.find("dgp");
    if (dgp == j.end()) throw ConfigError("config: missing 'dgp'");
    c.dgp = dgp_from_json(*dgp);
    if (auto n = dgp->find("n"); n != dgp->end()) {
        if (n->is_array()) read(*dgp, "n", c.sample_sizes, "dgp");
        else if (n->is_number_unsigned()) c.sample_sizes = {n->get<std::size_t>()};
        else throw ConfigError("dgp.n: expected a positive integer or a list of them");
    } else {
        c.sample_sizes = {c.dgp.n};
    }
    if (!c.sample_sizes.empty()) c.dgp.n = c.sample_sizes.front();
    if (auto e = j.find("estimator"); e != j.end()) c.estimator = estimator_from_json(*e);
    read(j, "replications", c.replications, "config");
    c.master_seed = c.dgp.seed;
    read(j, "master_seed", c.master_seed, "config");
    read(j, "flip_sign", c.flip_sign, "config");
    if (auto o = j.find("output"); o != j.end()) {
        check_keys(*o, "output", {"dir", "formats"});
        read(*o, "dir", c.output_dir, "output");
        read(*o, "formats", c.formats, "output");
    }
    c.validate();
    return c;
}

json to_json(const ExperimentConfig& c) {
    json dgp = to_json(c.dgp);
    dgp["n"] = c.sample_sizes;
    return {{"label", c.label},
            {"dgp", dgp},
            {"estimator", to_json(c.estimator)},
            {"replications", c.replications},
            {"master_seed", c.master_seed},
            {"flip_sign", c.flip_sign},
            {"output", {{"dir", c.output_dir}, {"formats", c.formats}}}};
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str());
}

json model_dump(const FittedRegressor& model, const std::string& dataset_ref) {
    json j = {{"kind", to_string(model.kind())}, {"input_dim", model.input_dim()},
              {"clamp", {model.clamp_low(), model.clamp_high()}}};
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KernelModel>) {
                j["kernel"] = to_json(m.spec);
                j["bandwidth"] = m.bandwidth;
                j["dataset"] = dataset_ref;
                j["global_mean"] = m.global_mean;
            } else if constexpr (std::is_same_v<T, SeriesModel>) {
                j["series"] = to_json(m.spec);
                j["low"] = m.low;
                j["high"] = m.high;
                j["coefficients"] = m.coef;
            } else if constexpr (std::is_same_v<T, MlpModel>) {
                j["mlp"] = to_json(m.spec);
                j["weights"] = std::vector<double>(m.net.params().begin(), m.net.params().end());
                j["loss_history"] = m.loss_history;
            } else {
                j["kernel_ridge"] = to_json(m.spec);
                j["coefficients"] = m.coef;
            }
        },
        model.model());
    return j;
}

}  // namespace rms
