#include "rolling.hpp"

#include "tsemos/error.hpp"
#include "tsemos/log.hpp"
#include "tsemos/objectives.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace tsemos {

namespace {

constexpr double kEmosRidge = 1e-8;
constexpr double kSigmaFloor = 1e-6;

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() < 2) return 0.0;
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

// CRPS that degrades to the absolute error for a point forecast.
double crps_or_abs(double mu, double sigma, double y) {
    return sigma > 0.0 ? crps_normal({mu, sigma}, y) : std::fabs(y - mu);
}

std::string date_of(const StationSeries& s, Eigen::Index i) {
    return format_date(s.dates[static_cast<std::size_t>(i)]);
}

struct ArEmosTarget {
    ArAdjustedStats stats;
    std::vector<ARCoeffs> member_ar;
};

// Adjusted-ensemble statistics for target index d, using the error history that
// is observable when the forecast for d is issued.
class ArEmosEngine {
public:
    ArEmosEngine(const StationSeries& series, const FitOptions& options)
        : series_(series), options_(options), k_(unobserved_days(series.lead_time_h)),
          cache_(series.size()) {}

    [[nodiscard]] int unobserved() const noexcept { return k_; }

    // Earliest target index with a full AR window.
    [[nodiscard]] Eigen::Index first_target() const noexcept { return options_.ar_window + k_; }

    const ArEmosTarget& target(Eigen::Index d) {
        if (d < first_target() || d >= static_cast<Eigen::Index>(series_.size())) {
            throw Error(ErrorCode::InsufficientHistory, "AR-EMOS needs " + std::to_string(options_.ar_window) +
                                                            " observed days before " + date_of(series_, d));
        }
        auto& slot = cache_[static_cast<std::size_t>(d)];
        if (!slot) slot = compute(d);
        return *slot;
    }

private:
    ArEmosTarget compute(Eigen::Index d) const {
        const Eigen::Index end = d - k_;
        const Eigen::Index begin = end - options_.ar_window;
        const Eigen::VectorXd y = series_.obs.segment(begin, options_.ar_window);
        if (!y.allFinite()) {
            throw Error(ErrorCode::InvalidInput, "missing observations in the AR-EMOS window; impute first");
        }
        const int m = series_.member_count();
        const int max_order =
            std::min(options_.ar_emos_max_order, default_max_ar_order(static_cast<std::size_t>(options_.ar_window)));
        ArEmosTarget out;
        out.member_ar.reserve(static_cast<std::size_t>(m));
        Eigen::VectorXd adjusted(m);
        double gamma_sq = 0.0;
        for (int j = 0; j < m; ++j) {
            const Eigen::VectorXd r = y - series_.members.col(j).segment(begin, options_.ar_window);
            ARCoeffs ar;
            try {
                ar = fit_ar_yule_walker(r, max_order);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateSeries) throw;
                log::warn("AR-EMOS: constant error series for member " + std::to_string(j + 1) + " before " +
                          date_of(series_, d) + ", using its mean");
                ar.eta = r.mean();
                ar.tau.resize(0);
                ar.innovation_variance = 0.0;
            }
            const double correction = ar_multistep(ar, r, k_ + 1)[k_];
            adjusted[j] = series_.members(d, j) + correction;
            gamma_sq += ar.innovation_variance;
            out.member_ar.push_back(std::move(ar));
        }
        out.stats.mu = adjusted.mean();
        out.stats.sigma1 = std::sqrt(gamma_sq / m);
        out.stats.sigma2 = sample_sd(adjusted);
        return out;
    }

    const StationSeries& series_;
    const FitOptions& options_;
    int k_;
    std::vector<std::optional<ArEmosTarget>> cache_;
};

struct WeightFit {
    double weight;
    double crps;
};

// Weight estimated on the targets [end − weight_window, end).
WeightFit weight_for(ArEmosEngine& engine, const StationSeries& series, Eigen::Index end, int weight_window) {
    const Eigen::Index begin = end - weight_window;
    if (begin < engine.first_target()) {
        throw Error(ErrorCode::InsufficientHistory,
                    "AR-EMOS needs a full weight window before " + date_of(series, std::min<Eigen::Index>(
                                                                                 end, series.size() - 1)));
    }
    std::vector<ArAdjustedStats> stats;
    stats.reserve(static_cast<std::size_t>(weight_window));
    for (Eigen::Index d = begin; d < end; ++d) stats.push_back(engine.target(d).stats);
    const Eigen::VectorXd y = series.obs.segment(begin, weight_window);
    const double w = estimate_ar_emos_weight(stats, y);
    double total = 0.0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        total += crps_or_abs(stats[i].mu, ar_emos_sigma(stats[i], w), y[static_cast<Eigen::Index>(i)]);
    }
    return {w, total / weight_window};
}

TrainingMeta base_meta(const StationSeries& train) {
    TrainingMeta meta;
    meta.station_id = train.station_id;
    meta.lead_time_h = train.lead_time_h;
    meta.train_start = train.dates.front();
    meta.train_end = train.dates.back();
    meta.n_train = train.size();
    return meta;
}

}  // namespace

EmosWindowFit fit_emos_window(const Eigen::Ref<const Eigen::VectorXd>& ens_mean,
                              const Eigen::Ref<const Eigen::VectorXd>& ens_sd,
                              const Eigen::Ref<const Eigen::VectorXd>& obs, const OptimizeSettings& settings) {
    const Eigen::Index n = obs.size();
    if (n < 2 || ens_mean.size() != n || ens_sd.size() != n) {
        throw Error(ErrorCode::InvalidInput, "EMOS window needs at least two aligned cases");
    }
    if (!obs.allFinite() || !ens_mean.allFinite() || !ens_sd.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "EMOS window contains missing values");
    }

    EmosWindowFit fit;
    fit.ridge = sample_sd(ens_sd.array().log().matrix()) < 1e-6;
    const EmosObjective objective(ens_mean, ens_sd, obs, fit.ridge ? kEmosRidge : 0.0);

    Eigen::MatrixXd x(n, 2);
    x.col(0).setOnes();
    x.col(1) = ens_mean;
    const Eigen::Vector2d a = x.colPivHouseholderQr().solve(obs);
    const double resid_sd = std::max(1e-3, sample_sd(obs - x * a));
    Eigen::VectorXd init(4);
    init << a[0], a[1], std::log(resid_sd), 0.0;

    fit.initial_value = objective(init);
    fit.result = minimize([&objective](const Eigen::VectorXd& th) { return objective(th); }, init, settings);
    const Eigen::VectorXd& c = fit.result.coefficients;
    fit.coeffs = {c[0], c[1], c[2], c[3]};
    return fit;
}

double estimate_ar_emos_weight(std::span<const ArAdjustedStats> stats, const Eigen::Ref<const Eigen::VectorXd>& obs) {
    if (stats.empty() || static_cast<Eigen::Index>(stats.size()) != obs.size()) {
        throw Error(ErrorCode::InvalidInput, "weight window needs aligned, non-empty statistics and observations");
    }
    auto f = [&](double w) {
        double total = 0.0;
        for (std::size_t i = 0; i < stats.size(); ++i) {
            total += crps_or_abs(stats[i].mu, ar_emos_sigma(stats[i], w), obs[static_cast<Eigen::Index>(i)]);
        }
        return total;
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-6) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    double best_value = f(best);
    for (double edge : {0.0, 1.0}) {
        const double v = f(edge);
        if (v < best_value) {
            best = edge;
            best_value = v;
        }
    }
    return best;
}

FittedModel fit_emos(const StationSeries& train, const FitOptions& options) {
    detail::require_complete(train, "training series");
    const auto w = static_cast<Eigen::Index>(options.emos_window);
    const auto n = static_cast<Eigen::Index>(train.size());
    if (n < w) throw Error(ErrorCode::InsufficientHistory, "EMOS needs a full training window");
    const EmosWindowFit fit = fit_emos_window(train.ens_mean.tail(w), train.ens_sd.tail(w), train.obs.tail(w),
                                              options.optimizer);
    FittedModel model;
    model.kind = ModelKind::Emos;
    model.loc = Eigen::Vector2d(fit.coeffs.a0, fit.coeffs.a1);
    model.scale = Eigen::Vector2d(fit.coeffs.b0, fit.coeffs.b1);
    model.meta = base_meta(train);
    model.meta.converged = fit.result.converged;
    model.meta.status = std::string(to_string(fit.result.status));
    model.meta.iterations = fit.result.iterations;
    model.meta.train_crps = fit.result.value;
    model.meta.initial_crps = fit.initial_value;
    return model;
}

FittedModel fit_ar_emos(const StationSeries& train, const FitOptions& options) {
    detail::require_complete(train, "training series");
    ArEmosEngine engine(train, options);
    const auto n = static_cast<Eigen::Index>(train.size());
    const WeightFit weight = weight_for(engine, train, n, options.weight_window);

    // Member fits on the most recent observed window, as used for the next forecast.
    FittedModel model;
    model.kind = ModelKind::ArEmos;
    model.loc.resize(0);
    model.scale.resize(0);
    model.member_ar = engine.target(n - 1).member_ar;
    model.weight = weight.weight;
    model.meta = base_meta(train);
    model.meta.converged = true;
    model.meta.status = "golden-section";
    model.meta.train_crps = weight.crps;
    model.meta.initial_crps = weight.crps;
    return model;
}

namespace detail {

std::vector<GaussianParams> predict_emos(const FittedModel&, const StationSeries& series, std::size_t begin,
                                         std::size_t end, const FitOptions& options) {
    const int k = unobserved_days(series.lead_time_h);
    const auto w = static_cast<Eigen::Index>(options.emos_window);
    std::vector<GaussianParams> out;
    out.reserve(end - begin);
    int unconverged = 0;
    for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
        const Eigen::Index stop = i - k;
        const Eigen::Index start = stop - w;
        if (start < 0) {
            throw Error(ErrorCode::InsufficientHistory,
                        "EMOS needs " + std::to_string(w) + " observed days before " + date_of(series, i));
        }
        const EmosWindowFit fit = fit_emos_window(series.ens_mean.segment(start, w), series.ens_sd.segment(start, w),
                                                  series.obs.segment(start, w), options.optimizer);
        if (!fit.result.converged) ++unconverged;
        const double mu = fit.coeffs.a0 + fit.coeffs.a1 * series.ens_mean[i];
        const double sigma = std::max(kSigmaFloor, std::exp(fit.coeffs.b0 + fit.coeffs.b1 * std::log(series.ens_sd[i])));
        if (!std::isfinite(mu) || !std::isfinite(sigma)) {
            throw Error(ErrorCode::NumericalFailure, "EMOS produced a non-finite forecast on " + date_of(series, i));
        }
        out.push_back({mu, sigma});
    }
    if (unconverged > 0) {
        log::warn("EMOS: " + std::to_string(unconverged) + " rolling-window fits did not converge for " +
                  series.station_id);
    }
    return out;
}

std::vector<GaussianParams> predict_ar_emos(const FittedModel&, const StationSeries& series, std::size_t begin,
                                            std::size_t end, const FitOptions& options) {
    ArEmosEngine engine(series, options);
    const int k = engine.unobserved();
    std::vector<GaussianParams> out;
    out.reserve(end - begin);
    for (auto i = static_cast<Eigen::Index>(begin); i < static_cast<Eigen::Index>(end); ++i) {
        const WeightFit weight = weight_for(engine, series, i - k, options.weight_window);
        const ArAdjustedStats& s = engine.target(i).stats;
        const double sigma = std::max(kSigmaFloor, ar_emos_sigma(s, weight.weight));
        if (!std::isfinite(s.mu) || !std::isfinite(sigma)) {
            throw Error(ErrorCode::NumericalFailure, "AR-EMOS produced a non-finite forecast on " + date_of(series, i));
        }
        out.push_back({s.mu, sigma});
    }
    return out;
}

}  // namespace detail

}  // namespace tsemos
