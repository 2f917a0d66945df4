#include "tsemos/synthetic.hpp"
#include "tsemos/error.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace tsemos {

SyntheticConfig default_synthetic_config() {
    SyntheticConfig cfg;
    cfg.location.intercept() = 1.0;
    cfg.location.slope() = 0.95;
    cfg.location.fourier_intercept() << 1.2, -0.8, 0.3, 0.2;
    cfg.location.fourier_slope() << 0.02, 0.03, 0.0, 0.0;
    cfg.scale.intercept() = -0.6;
    cfg.scale.slope() = 0.8;
    cfg.scale.fourier_intercept() << 0.12, 0.08, 0.0, 0.0;
    cfg.spread_noise_sd = 0.35;
    cfg.spread_persistence = 0.3;
    cfg.error_process = ErrorProcess::Standardized;
    cfg.ar.eta = 0.0;
    cfg.ar.tau = Eigen::VectorXd::Constant(1, 0.6);
    return cfg;
}

SyntheticConfig scenario_config(SyntheticScenario scenario) {
    SyntheticConfig cfg = default_synthetic_config();
    if (scenario == SyntheticScenario::Sar) return cfg;
    cfg.scale.intercept() = -0.15;
    cfg.scale.slope() = 0.3;
    cfg.spread_noise_sd = 0.2;
    cfg.spread_persistence = 0.6;
    cfg.error_process = ErrorProcess::Deseasonalized;
    cfg.ar.tau = Eigen::VectorXd::Constant(1, 0.7);
    if (scenario == SyntheticScenario::Garch) cfg.garch = GARCHCoeffs{0.2, 0.6, 0.2};
    return cfg;
}

void validate(const SyntheticConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, "synthetic config: " + msg); };
    if (cfg.n_days < 1) fail("n_days must be >= 1");
    if (cfg.members < 2) fail("members must be >= 2");
    if (cfg.lead_time_h < 1) fail("lead_time_h must be >= 1");
    if (cfg.burn_in < 0) fail("burn_in must be >= 0");
    if (!(cfg.spread_mean > 0.0)) fail("spread_mean must be positive");
    if (!(cfg.anomaly_sd >= 0.0) || !(cfg.spread_noise_sd >= 0.0)) fail("noise scales must be >= 0");
    if (!(std::abs(cfg.anomaly_persistence) < 1.0) || !(std::abs(cfg.spread_persistence) < 1.0)) {
        fail("persistence parameters must lie in (-1, 1)");
    }
    if (!cfg.location.all_finite() || !cfg.scale.all_finite()) fail("seasonal coefficients must be finite");
    if (!cfg.ar.tau.allFinite() || !std::isfinite(cfg.ar.eta)) fail("AR coefficients must be finite");
    if (!is_stationary(cfg.ar)) fail("AR coefficients are not stationary");
    if (cfg.garch) {
        const GARCHCoeffs& g = *cfg.garch;
        if (!(g.omega0 > 0.0) || g.omega1 < 0.0 || g.omega2 < 0.0) fail("GARCH needs omega0 > 0, omega1/2 >= 0");
        if (!g.is_stationary()) fail("GARCH needs omega1 + omega2 < 1");
    }
}

SyntheticStation generate_synthetic(const SyntheticConfig& cfg) {
    validate(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int total = cfg.burn_in + cfg.n_days;
    const int p = cfg.ar.order();
    const double w = 2.0 * std::numbers::pi / kSeasonalPeriod;
    const double anomaly_innov = std::sqrt(1.0 - cfg.anomaly_persistence * cfg.anomaly_persistence) * cfg.anomaly_sd;
    const double spread_innov =
        std::sqrt(1.0 - cfg.spread_persistence * cfg.spread_persistence) * cfg.spread_noise_sd;

    // AR state (r or z) starts at its mean; burn-in removes the transient.
    Eigen::VectorXd state = Eigen::VectorXd::Constant(std::max(p, 1), cfg.ar.eta);
    double garch_var = cfg.garch ? cfg.garch->initial_variance() : 1.0;
    double prev_innov_sq = garch_var;
    double anomaly = 0.0;
    double spread_noise = 0.0;

    const int m = cfg.members;
    std::vector<Date> dates;
    dates.reserve(cfg.n_days);
    Eigen::VectorXd obs(cfg.n_days);
    Eigen::MatrixXd members(cfg.n_days, m);
    SyntheticTruth truth{Eigen::VectorXd(cfg.n_days), Eigen::VectorXd(cfg.n_days)};
    Eigen::VectorXd draws(m);

    for (int j = 0; j < total; ++j) {
        const int day = j - cfg.burn_in;
        const double t = static_cast<double>(day) + 1.0;

        anomaly = cfg.anomaly_persistence * anomaly + anomaly_innov * normal(rng);
        spread_noise = cfg.spread_persistence * spread_noise + spread_innov * normal(rng);
        const double ens_mean = cfg.climate_mean + cfg.climate_amplitude * std::sin(w * t + cfg.climate_phase) + anomaly;
        const double ens_sd = cfg.spread_mean * std::exp(cfg.spread_seasonal * std::cos(w * t) + spread_noise);

        const double mu_s = seasonal_location(cfg.location, t, ens_mean);
        const double sigma_s = std::exp(seasonal_logscale(cfg.scale, t, ens_sd));

        if (cfg.garch) {
            garch_var = cfg.garch->omega0 + cfg.garch->omega1 * garch_var + cfg.garch->omega2 * prev_innov_sq;
        }
        const double sigma_g = std::sqrt(garch_var);
        const double innov = sigma_g * normal(rng);
        prev_innov_sq = innov * innov;

        const double ar_mean = p > 0 ? ar_one_step(cfg.ar, state) : cfg.ar.eta;
        const double next_state = ar_mean + (cfg.error_process == ErrorProcess::Deseasonalized ? sigma_s * innov : innov);
        if (p > 0) {
            state.head(p - 1) = state.tail(p - 1).eval();
            state[p - 1] = next_state;
        }

        double y = 0.0;
        double true_mu = 0.0;
        if (cfg.error_process == ErrorProcess::Deseasonalized) {
            y = mu_s + next_state;
            true_mu = mu_s + ar_mean;
        } else {
            y = mu_s + sigma_s * next_state;
            true_mu = mu_s + sigma_s * ar_mean;
        }

        // Members are standardized draws rescaled to the target mean and spread.
        for (int i = 0; i < m; ++i) draws[i] = normal(rng);
        if (day < 0) continue;
        const double dm = draws.mean();
        const double dsd = std::sqrt((draws.array() - dm).square().sum() / (m - 1));
        members.row(day) = (ens_mean + ens_sd * ((draws.array() - dm) / dsd)).transpose();
        obs[day] = y;
        truth.mu[day] = true_mu;
        truth.sigma[day] = sigma_s * sigma_g;
        dates.push_back(cfg.start + std::chrono::days{day});
    }

    SyntheticStation out;
    out.series = make_station_series(cfg.station_id, cfg.lead_time_h, std::move(dates), std::move(obs),
                                     std::move(members));
    out.truth = std::move(truth);
    return out;
}

void write_truth_csv(const std::filesystem::path& path, const SyntheticStation& station) {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IOError, "cannot write " + path.string());
    }
    out << "station_id,date,lead_time_h,mu,sigma\n";
    const StationSeries& s = station.series;
    char buf[96];
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        std::snprintf(buf, sizeof buf, ",%.10f,%.10f\n", station.truth.mu[r], station.truth.sigma[r]);
        out << s.station_id << ',' << format_date(s.dates[i]) << ',' << s.lead_time_h << buf;
    }
    if (!out) {
        throw Error(ErrorCode::IOError, "failed writing " + path.string());
    }
}

}  // namespace tsemos
