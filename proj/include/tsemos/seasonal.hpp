#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace tsemos {

/// Length of the seasonal cycle in days of the running time index.
inline constexpr double kSeasonalPeriod = 365.25;

/// Two-harmonic Fourier basis (sin, cos, sin, cos) at angular frequencies
/// 2π/365.25 and 4π/365.25.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> fourier_features(Scalar t) {
    using std::cos;
    using std::sin;
    const Scalar w = Scalar(2.0 * std::numbers::pi / kSeasonalPeriod) * t;
    Eigen::Matrix<Scalar, 4, 1> f;
    f << sin(w), cos(w), sin(Scalar(2) * w), cos(Scalar(2) * w);
    return f;
}

/// Coefficients of one seasonal linear predictor, stored in the fixed layout
/// (intercept, slope, 4 Fourier-intercept, 4 Fourier-slope).
template <typename Scalar>
struct SeasonalCoeffsT {
    using Vector = Eigen::Matrix<Scalar, 10, 1>;

    Vector values = Vector::Zero();

    SeasonalCoeffsT() = default;
    explicit SeasonalCoeffsT(const Vector& v) : values(v) {}
    template <typename Derived>
    static SeasonalCoeffsT from(const Eigen::MatrixBase<Derived>& v) {
        return SeasonalCoeffsT(Vector(v));
    }

    Scalar& intercept() { return values[0]; }
    Scalar intercept() const { return values[0]; }
    Scalar& slope() { return values[1]; }
    Scalar slope() const { return values[1]; }
    auto fourier_intercept() { return values.template segment<4>(2); }
    auto fourier_intercept() const { return values.template segment<4>(2); }
    auto fourier_slope() { return values.template segment<4>(6); }
    auto fourier_slope() const { return values.template segment<4>(6); }

    [[nodiscard]] bool all_finite() const { return values.allFinite(); }
};

using SeasonalCoeffs = SeasonalCoeffsT<double>;

/// Design row [1, x, f(t), f(t)·x] so that a predictor equals row · coeffs.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 10> seasonal_design_row(Scalar t, Scalar x) {
    const Eigen::Matrix<Scalar, 4, 1> f = fourier_features(t);
    Eigen::Matrix<Scalar, 1, 10> row;
    row << Scalar(1), x, f.transpose(), x * f.transpose();
    return row;
}

/// Stacked design rows for a whole series.
inline Eigen::MatrixXd seasonal_design(const Eigen::VectorXd& t, const Eigen::VectorXd& x) {
    Eigen::MatrixXd design(t.size(), 10);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        design.row(i) = seasonal_design_row(t[i], x[i]);
    }
    return design;
}

/// μ_S = a₀ + f₀(t) + (a₁ + f₁(t))·x̄
template <typename Scalar>
Scalar seasonal_location(const SeasonalCoeffsT<Scalar>& c, Scalar t, Scalar ens_mean) {
    const Eigen::Matrix<Scalar, 4, 1> f = fourier_features(t);
    return c.intercept() + c.fourier_intercept().dot(f) +
           (c.slope() + c.fourier_slope().dot(f)) * ens_mean;
}

/// log σ_S = b₀ + g₀(t) + (b₁ + g₁(t))·s. The raw ensemble spread enters
/// linearly, not through its logarithm.
template <typename Scalar>
Scalar seasonal_logscale(const SeasonalCoeffsT<Scalar>& c, Scalar t, Scalar ens_sd) {
    return seasonal_location(c, t, ens_sd);
}

/// Amplitude of harmonic 1 or 2 of a 4-term Fourier block.
template <typename Derived>
double harmonic_amplitude(const Eigen::MatrixBase<Derived>& fourier, int harmonic) {
    const Eigen::Index k = 2 * (harmonic - 1);
    return std::hypot(double(fourier[k]), double(fourier[k + 1]));
}

}  // namespace tsemos
