#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string_view>

namespace tsemos {

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Returns the objective value and writes the gradient into the second argument.
using ObjectiveWithGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimizeSettings {
    int max_iterations = 500;
    double gradient_tolerance = 1e-6;
    double step_tolerance = 1e-10;
    // Finite-difference step; component i uses h·(1 + |x_i|).
    double fd_step = 1e-6;
    // Strong Wolfe line-search constants and evaluation budget.
    double armijo = 1e-4;
    double curvature = 0.9;
    int max_line_search = 40;
};

enum class OptStatus {
    GradientConverged,
    StepConverged,
    MaxIterations,
    LineSearchFailed,
    NumericalFailure,
};

[[nodiscard]] std::string_view to_string(OptStatus status) noexcept;

struct OptResult {
    Eigen::VectorXd coefficients;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    OptStatus status = OptStatus::MaxIterations;
};

/// Central differences (f(x + h e_i) − f(x − h e_i)) / 2h with a common step h.
[[nodiscard]] Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h);

/// Central differences with a per-component step.
[[nodiscard]] Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x,
                                               const Eigen::VectorXd& steps);

/// BFGS with a strong-Wolfe line search. The gradient comes from central
/// differences unless `gradient` is supplied. The returned point is never worse
/// than `init`; a non-finite objective at `init` throws InvalidStart.
[[nodiscard]] OptResult minimize(const Objective& objective, const Eigen::VectorXd& init,
                                 const OptimizeSettings& settings = {},
                                 const ObjectiveWithGradient& gradient = nullptr);

}  // namespace tsemos
