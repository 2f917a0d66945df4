#include "tsemos/models.hpp"

#include "rolling.hpp"
#include "tsemos/error.hpp"
#include "tsemos/log.hpp"
#include "tsemos/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace tsemos {

namespace {

constexpr std::size_t kMinSeasonalTraining = 730;

double circular_phase_distance(double a, double b) {
    const double d = std::fabs(std::fmod(a, kSeasonalPeriod) - std::fmod(b, kSeasonalPeriod));
    return std::min(d, kSeasonalPeriod - d);
}

// Sample sd of the observations whose day of year lies within `half_window`
// days of each case, pooled over all years.
Eigen::VectorXd pooled_climatological_sd(const Eigen::VectorXd& t, const Eigen::VectorXd& y, int half_window) {
    const Eigen::Index n = y.size();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0, sum_sq = 0.0;
        int count = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (circular_phase_distance(t[i], t[j]) <= half_window) {
                sum += y[j];
                sum_sq += y[j] * y[j];
                ++count;
            }
        }
        if (count < 2) throw Error(ErrorCode::InsufficientHistory, "too few observations for the pooled spread");
        const double mean = sum / count;
        out[i] = std::sqrt(std::max(0.0, (sum_sq - count * mean * mean) / (count - 1)));
    }
    if (out.minCoeff() <= 0.0) throw Error(ErrorCode::DegenerateSeries, "observations are constant within a window");
    return out;
}

Eigen::VectorXd time_indices(const StationSeries& s, Date origin) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(s.size()));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = time_index(origin, s.dates[static_cast<std::size_t>(i)]);
    return t;
}

// One-step residuals of an AR model over u[p..n).
Eigen::VectorXd ar_residuals(const ARCoeffs& ar, const Eigen::VectorXd& u) {
    const int p = ar.order();
    Eigen::VectorXd eps(u.size() - p);
    for (Eigen::Index t = p; t < u.size(); ++t) eps[t - p] = u[t] - ar_one_step(ar, u.head(t));
    return eps;
}

FittedModel fit_seasonal(ModelKind kind, const StationSeries& train, const FitOptions& options) {
    detail::require_complete(train, "training series");
    if (train.size() < kMinSeasonalTraining) {
        throw Error(ErrorCode::InsufficientHistory,
                    "seasonal models need at least two years of training data, got " + std::to_string(train.size()) +
                        " days");
    }
    const Date origin = train.dates.front();
    SeasonalDesign design = make_seasonal_design(train, origin);
    const Eigen::VectorXd& y = design.obs;

    const Eigen::VectorXd loc0 = design.location.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd r0 = y - design.location * loc0;

    Eigen::VectorXd scale0 = Eigen::VectorXd::Zero(10);
    if (kind == ModelKind::Semos || kind == ModelKind::DarSemos) {
        scale0[1] = 1.0;
    } else {
        const Eigen::VectorXd shat =
            pooled_climatological_sd(time_indices(train, origin), y, options.climatology_half_window);
        scale0 = design.scale.colPivHouseholderQr().solve(shat.array().log().matrix());
    }
    const Eigen::VectorXd sig0 = (design.scale * scale0).array().exp().matrix();

    FittedModel init;
    init.kind = kind;
    init.loc = loc0;
    init.scale = scale0;
    if (kind == ModelKind::SarSemos) {
        init.ar = fit_ar_yule_walker((r0.array() / sig0.array()).matrix(), options.max_ar_order);
    } else if (has_ar(kind)) {
        init.ar = fit_ar_yule_walker(r0, options.max_ar_order);
    }
    if (kind == ModelKind::DarGarchSemos) {
        const Eigen::VectorXd eps = ar_residuals(*init.ar, r0);
        init.garch = fit_garch((eps.array() / sig0.tail(eps.size()).array()).matrix());
    }

    const ParameterLayout layout{kind, init.ar ? init.ar->order() : 0};
    const SeasonalObjective objective(layout, std::move(design));
    const Eigen::VectorXd theta0 = pack_parameters(layout, init);
    const double initial = objective(theta0);

    ObjectiveWithGradient gradient = nullptr;
    if (options.analytic_gradient) {
        gradient = [&objective](const Eigen::VectorXd& th, Eigen::VectorXd& g) {
            return objective.value_and_gradient(th, g);
        };
    }
    const OptResult result =
        minimize([&objective](const Eigen::VectorXd& th) { return objective(th); }, theta0, options.optimizer,
                 gradient);

    FittedModel model;
    unpack_parameters(layout, result.coefficients, model);
    if (!result.converged) {
        log::warn(std::string(to_string(kind)) + " fit for " + train.station_id + " stopped: " +
                  std::string(to_string(result.status)));
    }
    model.meta.station_id = train.station_id;
    model.meta.lead_time_h = train.lead_time_h;
    model.meta.train_start = train.dates.front();
    model.meta.train_end = train.dates.back();
    model.meta.n_train = train.size();
    model.meta.converged = result.converged;
    model.meta.status = std::string(to_string(result.status));
    model.meta.iterations = result.iterations;
    model.meta.initial_crps = initial;
    model.meta.train_crps = result.value;
    return model;
}

std::vector<GaussianParams> predict_seasonal(const FittedModel& model, const StationSeries& series,
                                             std::size_t begin, std::size_t end) {
    const PredictionContext ctx(series, model.meta.train_start);
    const auto n = static_cast<Eigen::Index>(series.size());
    const int k = ctx.unobserved();
    const int p = model.ar ? model.ar->order() : 0;
    const auto last_obs = ctx.observable_end(static_cast<Eigen::Index>(end) - 1);
    if (!series.obs.head(last_obs).allFinite()) {
        throw Error(ErrorCode::InvalidInput, "observation history contains missing values; impute first");
    }

    const SeasonalCoeffs loc = model.location_coeffs();
    const SeasonalCoeffs scale = model.scale_coeffs();
    Eigen::VectorXd muS(n), sigS(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = ctx.time_index(i);
        muS[i] = seasonal_location(loc, t, series.ens_mean[i]);
        sigS[i] = std::exp(seasonal_logscale(scale, t, series.ens_sd[i]));
    }

    Eigen::VectorXd u;
    if (model.kind == ModelKind::SarSemos) {
        u = ((series.obs - muS).array() / sigS.array()).matrix();
    } else if (has_ar(model.kind)) {
        u = series.obs - muS;
    }
    if (has_ar(model.kind) && k > 0 && !is_stationary(*model.ar)) {
        log::warn("AR coefficients are not stationary; multi-step predictions may diverge");
    }

    // Filtered GARCH variances v[j] for j in [p, last_obs], driven by observed residuals only.
    Eigen::VectorXd v;
    if (model.kind == ModelKind::DarGarchSemos) {
        const GARCHCoeffs& g = *model.garch;
        v = Eigen::VectorXd::Constant(std::max<Eigen::Index>(last_obs + 1, p + 1), g.initial_variance());
        for (Eigen::Index j = p; j < last_obs; ++j) {
            const double rho = (u[j] - ar_one_step(*model.ar, u.head(j))) / sigS[j];
            v[j + 1] = g.omega0 + g.omega1 * v[j] + g.omega2 * rho * rho;
        }
    }

    std::vector<GaussianParams> out;
    out.reserve(end - begin);
    for (auto idx = static_cast<Eigen::Index>(begin); idx < static_cast<Eigen::Index>(end); ++idx) {
        const Eigen::Index e = ctx.observable_end(idx);
        if (has_ar(model.kind) && e < p) {
            throw Error(ErrorCode::InsufficientHistory,
                        "not enough observed history before " + format_date(series.dates[idx]));
        }
        double mu = muS[idx];
        double sigma = sigS[idx];
        if (has_ar(model.kind)) {
            const double pred = ar_multistep(*model.ar, u.head(e), static_cast<int>(idx - e) + 1)[idx - e];
            mu += model.kind == ModelKind::SarSemos ? sigS[idx] * pred : pred;
        }
        if (model.kind == ModelKind::DarGarchSemos) {
            const GARCHCoeffs& g = *model.garch;
            double var = v[e];
            for (Eigen::Index h = e; h < idx; ++h) var = g.omega0 + (g.omega1 + g.omega2) * var;
            sigma *= std::sqrt(var);
        }
        if (!GaussianParams{mu, sigma}.valid()) {
            throw Error(ErrorCode::NumericalFailure,
                        "degenerate predictive distribution on " + format_date(series.dates[idx]));
        }
        out.push_back({mu, sigma});
    }
    return out;
}

}  // namespace

namespace detail {

void require_complete(const StationSeries& series, std::string_view what) {
    if (series.size() == 0) throw Error(ErrorCode::EmptyInput, std::string(what) + " is empty");
    if (series.has_missing()) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + " has missing observations; impute first");
    }
}

}  // namespace detail

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::Emos: return "EMOS";
        case ModelKind::ArEmos: return "AR-EMOS";
        case ModelKind::Semos: return "SEMOS";
        case ModelKind::DarSemos: return "DAR-SEMOS";
        case ModelKind::DarGarchSemos: return "DAR-GARCH-SEMOS";
        case ModelKind::SarSemos: return "SAR-SEMOS";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (ModelKind k : kAllModels) {
        if (to_string(k) == upper) return k;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown model '" + std::string(name) + "'");
}

void validate(const FittedModel& model) {
    const Eigen::Index width = is_seasonal(model.kind) ? 10 : model.kind == ModelKind::Emos ? 2 : 0;
    if (model.loc.size() != width || model.scale.size() != width) {
        throw Error(ErrorCode::InvalidInput, "coefficient vectors have the wrong length");
    }
    if (!model.loc.allFinite() || !model.scale.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "coefficients must be finite");
    }
    if (has_ar(model.kind) != model.ar.has_value()) {
        throw Error(ErrorCode::InvalidInput, "AR coefficients do not match the model kind");
    }
    if ((model.kind == ModelKind::DarGarchSemos) != model.garch.has_value()) {
        throw Error(ErrorCode::InvalidInput, "GARCH coefficients do not match the model kind");
    }
    if (model.garch && (model.garch->omega0 < 0.0 || model.garch->omega1 < 0.0 || model.garch->omega2 < 0.0)) {
        throw Error(ErrorCode::InvalidInput, "GARCH coefficients must be non-negative");
    }
    if ((model.kind == ModelKind::ArEmos) != model.weight.has_value()) {
        throw Error(ErrorCode::InvalidInput, "AR-EMOS weight does not match the model kind");
    }
    if ((model.kind == ModelKind::ArEmos) == model.member_ar.empty()) {
        throw Error(ErrorCode::InvalidInput, "member AR coefficients do not match the model kind");
    }
    if (model.weight && !(*model.weight >= 0.0 && *model.weight <= 1.0)) {
        throw Error(ErrorCode::InvalidInput, "AR-EMOS weight must lie in [0, 1]");
    }
}

FittedModel fit_semos(const StationSeries& train, const FitOptions& options) {
    return fit_seasonal(ModelKind::Semos, train, options);
}
FittedModel fit_dar_semos(const StationSeries& train, const FitOptions& options) {
    return fit_seasonal(ModelKind::DarSemos, train, options);
}
FittedModel fit_dar_garch_semos(const StationSeries& train, const FitOptions& options) {
    return fit_seasonal(ModelKind::DarGarchSemos, train, options);
}
FittedModel fit_sar_semos(const StationSeries& train, const FitOptions& options) {
    return fit_seasonal(ModelKind::SarSemos, train, options);
}

FittedModel fit_model(ModelKind kind, const StationSeries& train, const FitOptions& options) {
    switch (kind) {
        case ModelKind::Emos: return fit_emos(train, options);
        case ModelKind::ArEmos: return fit_ar_emos(train, options);
        default: return fit_seasonal(kind, train, options);
    }
}

std::vector<GaussianParams> predict(const FittedModel& model, const StationSeries& series, std::size_t begin,
                                    std::size_t end, const FitOptions& options) {
    validate(model);
    if (begin > end || end > series.size()) throw Error(ErrorCode::InvalidInput, "prediction range out of bounds");
    if (model.meta.lead_time_h != series.lead_time_h) {
        throw Error(ErrorCode::InvalidInput, "model was fitted for a different lead time");
    }
    if (begin == end) return {};
    switch (model.kind) {
        case ModelKind::Emos: return detail::predict_emos(model, series, begin, end, options);
        case ModelKind::ArEmos: return detail::predict_ar_emos(model, series, begin, end, options);
        default: return predict_seasonal(model, series, begin, end);
    }
}

TrainingResiduals training_residuals(const FittedModel& model, const StationSeries& train) {
    validate(model);
    if (!is_seasonal(model.kind)) throw Error(ErrorCode::InvalidInput, "training residuals need a seasonal model");
    detail::require_complete(train, "training series");
    const ParameterLayout layout{model.kind, model.ar ? model.ar->order() : 0};
    const SeasonalObjective objective(layout, make_seasonal_design(train, model.meta.train_start));
    const std::vector<GaussianParams> fit = objective.fitted(pack_parameters(layout, model));
    if (fit.size() != train.size() - static_cast<std::size_t>(layout.ar_order)) {
        throw Error(ErrorCode::NumericalFailure, "degenerate in-sample predictive distribution");
    }
    TrainingResiduals out;
    out.residual.resize(static_cast<Eigen::Index>(fit.size()));
    out.standardized.resize(out.residual.size());
    for (Eigen::Index i = 0; i < out.residual.size(); ++i) {
        const double y = train.obs[i + layout.ar_order];
        out.residual[i] = y - fit[static_cast<std::size_t>(i)].mu;
        out.standardized[i] = out.residual[i] / fit[static_cast<std::size_t>(i)].sigma;
    }
    return out;
}

}  // namespace tsemos
