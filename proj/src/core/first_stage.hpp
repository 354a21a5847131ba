#pragma once

// First-stage nonparametric regressions of y - c_J on the flattened covariate
// vector. Every fit returns an immutable FittedRegressor whose predictions are
// clipped to [-c_J, 1 - c_J], the range of a centered probability.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "core/dgp.hpp"
#include "core/kernels.hpp"
#include "core/mlp.hpp"

namespace rms {

enum class SeriesBasis { Legendre, CubicSpline };

std::string to_string(SeriesBasis basis);
SeriesBasis series_basis_from_string(const std::string& name);

struct SeriesSpec {
    SeriesBasis univariate_basis = SeriesBasis::Legendre;
    // Number of univariate functions per coordinate; K_n = per_dim_degree^{J d}.
    std::size_t per_dim_degree = 4;

    void validate() const;
    std::size_t total_dimension(std::size_t width) const;
};

// Kernel ridge regression with (gamma * x'z + coef0)^degree and ridge alpha.
struct KernelRidgeSpec {
    double alpha = 0.1;
    double gamma = 1e-4;
    int degree = 3;
    double coef0 = 1.0;

    void validate() const;
};

enum class RegressorKind { Kernel, Series, Mlp, KernelRidge };
std::string to_string(RegressorKind kind);

struct Prediction {
    double value = 0.0;
    // Kernel only: denominator underflowed and the global mean was used.
    bool fallback = false;
};

struct KernelModel {
    KernelSpec spec;
    double bandwidth = 0.0;
    std::shared_ptr<const Dataset> train;
    double global_mean = 0.0;
};

struct SeriesModel {
    SeriesSpec spec;
    std::vector<double> low, high;
    std::vector<double> coef;
};

struct MlpModel {
    MlpSpec spec;
    Mlp net;
    std::vector<double> loss_history;
};

struct KernelRidgeModel {
    KernelRidgeSpec spec;
    std::size_t width = 0;
    std::vector<double> coef;
};

class FittedRegressor {
public:
    using Model = std::variant<KernelModel, SeriesModel, MlpModel, KernelRidgeModel>;

    FittedRegressor(Model model, std::size_t width, double centering);

    RegressorKind kind() const;
    std::size_t input_dim() const noexcept { return width_; }
    double clamp_low() const noexcept { return -centering_; }
    double clamp_high() const noexcept { return 1.0 - centering_; }

    double predict(std::span<const double> x) const { return predict_detail(x).value; }
    Prediction predict_detail(std::span<const double> x) const;
    // Unclamped value; exposed for the range tests.
    double predict_raw(std::span<const double> x) const;
    std::vector<double> predict_all(const Dataset& data) const;

    const Model& model() const noexcept { return model_; }

private:
    Prediction raw(std::span<const double> x) const;

    Model model_;
    std::size_t width_;
    double centering_;
};

FittedRegressor fit_kernel(const Dataset& data, const KernelSpec& spec);
FittedRegressor fit_kernel(std::shared_ptr<const Dataset> data, const KernelSpec& spec);
FittedRegressor fit_series(const Dataset& data, const SeriesSpec& spec);
FittedRegressor fit_mlp(const Dataset& data, const MlpSpec& spec);
FittedRegressor fit_kernel_ridge(const Dataset& data, const KernelRidgeSpec& spec);

// Evaluates the tensor-product basis at a point already rescaled to [-1,1].
void series_basis_row(const SeriesSpec& spec, std::span<const double> t, std::span<double> out);
// Univariate basis values b_0(t) .. b_{J_n-1}(t).
void univariate_basis(SeriesBasis basis, std::size_t count, double t, std::span<double> out);

}  // namespace rms
