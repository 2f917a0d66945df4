#pragma once

#include "tsemos/data.hpp"
#include "tsemos/models.hpp"
#include "tsemos/scoring.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tsemos {

/// Design matrices of a training series for the seasonal models.
struct SeasonalDesign {
    Eigen::MatrixXd location;  // rows [1, x̄, f(t), f(t)·x̄]
    Eigen::MatrixXd scale;     // rows [1, s, f(t), f(t)·s]
    Eigen::VectorXd obs;

    [[nodiscard]] Eigen::Index size() const noexcept { return obs.size(); }
};

/// Time index t counts days from `origin` (origin itself is t = 1).
[[nodiscard]] SeasonalDesign make_seasonal_design(const StationSeries& series, Date origin);

/// Parameter vector layout of a seasonal model:
/// [loc(10), scale(10), (η, τ₁..τ_p), (q₀, q₁, q₂)] with ω_i = q_i².
struct ParameterLayout {
    ModelKind kind = ModelKind::Semos;
    int ar_order = 0;

    [[nodiscard]] Eigen::Index ar_offset() const noexcept { return 20; }
    [[nodiscard]] Eigen::Index garch_offset() const noexcept { return 20 + (has_ar(kind) ? ar_order + 1 : 0); }
    [[nodiscard]] Eigen::Index size() const noexcept {
        return garch_offset() + (kind == ModelKind::DarGarchSemos ? 3 : 0);
    }
};

[[nodiscard]] Eigen::VectorXd pack_parameters(const ParameterLayout& layout, const FittedModel& model);
/// Writes the parameters into the coefficient fields of `model`.
void unpack_parameters(const ParameterLayout& layout, const Eigen::VectorXd& theta, FittedModel& model);

/// Mean CRPS of the one-step predictive distributions over the training cases
/// (index ≥ p). Autoregressive terms use the observed history.
class SeasonalObjective {
public:
    SeasonalObjective(ParameterLayout layout, SeasonalDesign design);

    [[nodiscard]] const ParameterLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] Eigen::Index first_case() const noexcept { return layout_.ar_order; }

    /// +inf when any predictive distribution is degenerate.
    [[nodiscard]] double operator()(const Eigen::VectorXd& theta) const;
    [[nodiscard]] double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

    /// Predictive parameters for cases first_case()..n−1.
    [[nodiscard]] std::vector<GaussianParams> fitted(const Eigen::VectorXd& theta) const;

private:
    double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, std::vector<GaussianParams>* out) const;

    ParameterLayout layout_;
    SeasonalDesign design_;
};

/// Mean CRPS of N(a₀ + a₁x̄, exp(b₀ + b₁ log s)²) over a window, θ = (a₀, a₁, b₀, b₁),
/// plus ridge·|θ|².
class EmosObjective {
public:
    EmosObjective(Eigen::VectorXd ens_mean, Eigen::VectorXd ens_sd, Eigen::VectorXd obs, double ridge = 0.0);

    [[nodiscard]] double operator()(const Eigen::VectorXd& theta) const;
    [[nodiscard]] double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

private:
    Eigen::VectorXd xbar_, log_s_, y_;
    double ridge_;
};

}  // namespace tsemos
