#pragma once

#include "tsemos/data.hpp"
#include "tsemos/seasonal.hpp"
#include "tsemos/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace tsemos {

/// Which series carries the autoregressive structure in the simulated errors.
enum class ErrorProcess {
    // r(t) = y(t) − μ_S(t) is AR(p) with innovations σ_S(t)·σ_G(t)·z(t).
    Deseasonalized,
    // z(t) = (y(t) − μ_S(t))/σ_S(t) is AR(p) with innovations σ_G(t)·ξ(t).
    Standardized,
};

/// Data-generating process for one synthetic station. The observation model is
/// written in terms of the published ensemble mean and spread, so the location
/// and scale truths are directly comparable with fitted coefficients.
struct SyntheticConfig {
    std::string station_id = "SYN01";
    int lead_time_h = 24;
    Date start = Date{std::chrono::year{2015} / 1 / 1};
    int n_days = 2192;
    int members = 50;

    // Ensemble mean: climatology plus a persistent weather anomaly.
    double climate_mean = 9.0;
    double climate_amplitude = 8.0;
    double climate_phase = -1.9;
    double anomaly_sd = 3.5;
    double anomaly_persistence = 0.7;

    // Ensemble spread: spread_mean·exp(spread_seasonal·cos(2πt/365.25) + u(t)).
    double spread_mean = 0.9;
    double spread_seasonal = 0.25;
    double spread_noise_sd = 0.2;
    double spread_persistence = 0.6;

    SeasonalCoeffs location;
    SeasonalCoeffs scale;
    ErrorProcess error_process = ErrorProcess::Standardized;
    ARCoeffs ar;
    std::optional<GARCHCoeffs> garch;

    int burn_in = 365;
    std::uint64_t seed = 1;
};

/// Seasonally miscalibrated, underdispersed ensemble with AR(1) τ = 0.6 in the
/// standardized errors.
[[nodiscard]] SyntheticConfig default_synthetic_config();

enum class SyntheticScenario {
    // The default: AR(1) τ = 0.6 in the standardized errors, with a strong
    // day-to-day spread-skill relation.
    Sar,
    // AR(1) τ = 0.7 in the deseasonalized errors, weaker spread-skill relation.
    Dar,
    // As Dar, with GARCH(1,1) (0.2, 0.6, 0.2) innovations.
    Garch,
};

[[nodiscard]] SyntheticConfig scenario_config(SyntheticScenario scenario);

/// Throws InvalidConfig for non-stationary AR/GARCH settings or invalid sizes.
void validate(const SyntheticConfig& cfg);

/// One-step-ahead conditional distribution of each observation given the past.
struct SyntheticTruth {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;
};

struct SyntheticStation {
    StationSeries series;
    SyntheticTruth truth;
};

[[nodiscard]] SyntheticStation generate_synthetic(const SyntheticConfig& cfg);

/// Sidecar CSV: station_id,date,lead_time_h,mu,sigma.
void write_truth_csv(const std::filesystem::path& path, const SyntheticStation& station);

}  // namespace tsemos
