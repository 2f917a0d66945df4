#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace tsemos {

/// Gaussian predictive distribution N(mu, sigma²) for one forecast case.
struct GaussianParams {
    double mu = 0.0;
    double sigma = 1.0;

    [[nodiscard]] bool valid() const noexcept {
        return std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0;
    }
};

/// Closed-form CRPS of a Gaussian forecast.
[[nodiscard]] double crps_normal(const GaussianParams& g, double y);

struct CrpsGradient {
    double d_mu = 0.0;
    double d_sigma = 0.0;
};

/// Partial derivatives of crps_normal: ∂/∂μ = 1 − 2Φ(z), ∂/∂σ = 2φ(z) − 1/√π
/// with z = (y − μ)/σ.
[[nodiscard]] CrpsGradient crps_normal_gradient(const GaussianParams& g, double y);

/// CRPS as the integral of (F(z) − 1{z ≥ y})² evaluated by adaptive
/// Gauss-Kronrod quadrature to absolute tolerance `tol`. Known jump points of
/// the CDF go in `breakpoints`; a jump that falls between quadrature nodes is
/// otherwise invisible to the error estimate.
[[nodiscard]] double crps_integral(const std::function<double(double)>& cdf, double y, double tol = 1e-10,
                                   std::span<const double> breakpoints = {});

/// CRPS of the empirical distribution of the members (energy form).
[[nodiscard]] double crps_ensemble(const Eigen::Ref<const Eigen::VectorXd>& members, double y);

/// Negative log density.
[[nodiscard]] double logs_normal(const GaussianParams& g, double y);

[[nodiscard]] double pit_normal(const GaussianParams& g, double y);

struct CentralInterval {
    double lower = 0.0;
    double upper = 0.0;
    double width = 0.0;
    bool covered = false;
};

[[nodiscard]] CentralInterval central_interval(const GaussianParams& g, double level, double y);

/// Nominal coverage (m−1)/(m+1) of an m-member ensemble's range.
[[nodiscard]] constexpr double ensemble_nominal_level(int members) noexcept {
    return static_cast<double>(members - 1) / static_cast<double>(members + 1);
}

/// Rank of y among the members, in 1..m+1; ties broken uniformly at random.
[[nodiscard]] int verification_rank(const Eigen::Ref<const Eigen::VectorXd>& members, double y,
                                    std::mt19937_64& rng);

/// Scores of one verification case. logs is NaN for forecasts without a density.
struct CaseScore {
    double crps = 0.0;
    double logs = 0.0;
    double se = 0.0;
    double pit = 0.5;
    double width = 0.0;
    bool covered = false;
};

using ScoreSample = std::vector<CaseScore>;

[[nodiscard]] CaseScore score_gaussian(const GaussianParams& g, double y, double level);

/// Raw-ensemble scores: CRPS of the empirical CDF, squared error of the mean,
/// the ensemble range as the (m−1)/(m+1) interval and a randomized PIT from
/// the verification rank.
[[nodiscard]] CaseScore score_ensemble(const Eigen::Ref<const Eigen::VectorXd>& members, double y,
                                       std::mt19937_64& rng);

struct ScoreSummary {
    double crps = 0.0;
    double logs = 0.0;
    double rmse = 0.0;
    double width = 0.0;
    double coverage = 0.0;  // percent
    std::size_t n = 0;
};

[[nodiscard]] ScoreSummary summarize(std::span<const CaseScore> scores);

/// 1 − CRPS/CRPS_ref.
[[nodiscard]] double crpss(double mean_crps, double mean_crps_ref);

}  // namespace tsemos
