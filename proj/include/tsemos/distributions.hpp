#pragma once

#include <cmath>
#include <numbers>

namespace tsemos {

inline double normal_pdf(double z) noexcept {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF through the complementary error function, which keeps
/// full relative accuracy in the lower tail.
inline double normal_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Standard normal quantile. Rational starting value refined by Halley steps;
/// absolute error is at the level of the CDF's own rounding.
[[nodiscard]] double normal_quantile(double p);

/// Regularized upper incomplete gamma function Q(a, x) = Γ(a, x) / Γ(a).
[[nodiscard]] double regularized_gamma_q(double a, double x);

/// Upper tail P(X > x) for X ~ chi-squared with `dof` degrees of freedom.
[[nodiscard]] double chi_squared_sf(double x, double dof);

}  // namespace tsemos
