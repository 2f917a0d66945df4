#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace tsemos {

/// AR(p) process r(t) = η + Σ τ_j (r(t−j) − η) + ε(t).
struct ARCoeffs {
    double eta = 0.0;
    Eigen::VectorXd tau;
    // Innovation variance of the Yule-Walker fit; zero when not estimated.
    double innovation_variance = 0.0;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(tau.size()); }
};

/// GARCH(1,1) coefficients: σ_G²(t) = ω₀ + ω₁ σ_G²(t−1) + ω₂ ρ²(t−1).
struct GARCHCoeffs {
    double omega0 = 1.0;
    double omega1 = 0.0;
    double omega2 = 0.0;

    [[nodiscard]] bool is_stationary() const noexcept { return omega1 + omega2 < 1.0; }

    /// Starting value of the recursion: the unconditional variance for a
    /// stationary process, otherwise 1.
    [[nodiscard]] double initial_variance() const noexcept {
        return is_stationary() ? omega0 / (1.0 - omega1 - omega2) : 1.0;
    }
};

/// Biased (divide-by-n) sample autocovariances c₀..c_k of the demeaned series.
[[nodiscard]] Eigen::VectorXd autocovariance(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag);

/// Sample autocorrelations ρ̂₁..ρ̂_k (lag 0 omitted).
[[nodiscard]] Eigen::VectorXd acf(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag);

struct LevinsonDurbin {
    // coefficients[k] holds the order-k Yule-Walker solution (coefficients[0] is empty).
    std::vector<Eigen::VectorXd> coefficients;
    // innovation_variance[k] is the prediction-error variance at order k.
    Eigen::VectorXd innovation_variance;
};

/// Levinson-Durbin recursion on autocovariances c₀..c_K, solving the Yule-Walker
/// equations for every order up to `max_order`.
[[nodiscard]] LevinsonDurbin levinson_durbin(const Eigen::Ref<const Eigen::VectorXd>& autocov, int max_order);

/// min(20, ⌊10·log10 n⌋), never below 0 nor above n − 2.
[[nodiscard]] int default_max_ar_order(std::size_t n) noexcept;

/// Yule-Walker AR fit with AIC order selection over 0..max_order; a negative
/// max_order selects the default. η is the sample mean.
[[nodiscard]] ARCoeffs fit_ar_yule_walker(const Eigen::Ref<const Eigen::VectorXd>& x, int max_order = -1);

/// Yule-Walker fit with the order held fixed.
[[nodiscard]] ARCoeffs fit_ar_yule_walker_order(const Eigen::Ref<const Eigen::VectorXd>& x, int order);

/// η + Σ τ_j (history[n−j] − η) using the last p entries of `history`.
[[nodiscard]] double ar_one_step(const ARCoeffs& ar, const Eigen::Ref<const Eigen::VectorXd>& history);

/// Iterated one-step predictions, each fed back as the newest history value.
[[nodiscard]] Eigen::VectorXd ar_multistep(const ARCoeffs& ar,
                                           const Eigen::Ref<const Eigen::VectorXd>& history, int steps);

/// True when every root of the characteristic polynomial lies inside the unit circle.
[[nodiscard]] bool is_stationary(const ARCoeffs& ar);

/// σ_G² series aligned with rho_sq: out[0] = init_var and
/// out[t] = ω₀ + ω₁ out[t−1] + ω₂ rho_sq[t−1].
[[nodiscard]] Eigen::VectorXd garch_filter(const GARCHCoeffs& g, const Eigen::Ref<const Eigen::VectorXd>& rho_sq,
                                           double init_var);

/// Gaussian quasi-maximum-likelihood GARCH(1,1) fit to a residual series ρ.
/// The recursion starts at the unconditional variance. Falls back to
/// (mean ρ², 0, 0) with a logged warning when the likelihood cannot be optimized.
[[nodiscard]] GARCHCoeffs fit_garch(const Eigen::Ref<const Eigen::VectorXd>& rho);

struct LjungBoxResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int lag = 0;
};

/// Q = n(n+2) Σ_{j≤k} ρ̂_j²/(n−j) against chi-squared with k degrees of freedom.
[[nodiscard]] LjungBoxResult ljung_box(const Eigen::Ref<const Eigen::VectorXd>& x, int lag);

}  // namespace tsemos
