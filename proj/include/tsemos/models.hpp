#pragma once

#include "tsemos/data.hpp"
#include "tsemos/optimize.hpp"
#include "tsemos/scoring.hpp"
#include "tsemos/seasonal.hpp"
#include "tsemos/timeseries.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsemos {

enum class ModelKind { Emos, ArEmos, Semos, DarSemos, DarGarchSemos, SarSemos };

inline constexpr ModelKind kAllModels[] = {ModelKind::Emos,     ModelKind::ArEmos,        ModelKind::Semos,
                                           ModelKind::DarSemos, ModelKind::DarGarchSemos, ModelKind::SarSemos};

/// "EMOS", "AR-EMOS", "SEMOS", "DAR-SEMOS", "DAR-GARCH-SEMOS", "SAR-SEMOS".
[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;
/// Case-insensitive inverse of to_string; throws InvalidConfig.
[[nodiscard]] ModelKind parse_model_kind(std::string_view name);

[[nodiscard]] constexpr bool is_seasonal(ModelKind kind) noexcept {
    return kind != ModelKind::Emos && kind != ModelKind::ArEmos;
}
[[nodiscard]] constexpr bool has_ar(ModelKind kind) noexcept {
    return kind == ModelKind::DarSemos || kind == ModelKind::DarGarchSemos || kind == ModelKind::SarSemos;
}

struct FitOptions {
    OptimizeSettings optimizer;
    // Use closed-form objective gradients instead of finite differences.
    bool analytic_gradient = false;
    // Upper bound for the Yule-Walker order search; negative selects the default.
    int max_ar_order = -1;
    // Half-width (days) of the pooled day-of-year window for the empirical spread.
    int climatology_half_window = 15;
    int emos_window = 30;
    int ar_window = 90;
    int weight_window = 30;
    int ar_emos_max_order = 5;
};

struct TrainingMeta {
    std::string station_id;
    int lead_time_h = 24;
    Date train_start{};
    Date train_end{};
    std::size_t n_train = 0;
    bool converged = false;
    std::string status;
    int iterations = 0;
    double initial_crps = 0.0;
    double train_crps = 0.0;
};

/// A fitted postprocessing model. Coefficient vectors use the fixed layout
/// (intercept, slope, 4 Fourier-intercept, 4 Fourier-slope) for the seasonal
/// models and (intercept, slope) for EMOS.
struct FittedModel {
    ModelKind kind = ModelKind::Semos;
    Eigen::VectorXd loc;
    Eigen::VectorXd scale;
    std::optional<ARCoeffs> ar;
    std::optional<GARCHCoeffs> garch;
    std::vector<ARCoeffs> member_ar;
    std::optional<double> weight;
    TrainingMeta meta;

    [[nodiscard]] SeasonalCoeffs location_coeffs() const { return SeasonalCoeffs::from(loc); }
    [[nodiscard]] SeasonalCoeffs scale_coeffs() const { return SeasonalCoeffs::from(scale); }
};

/// Throws InvalidInput when the components do not match the model kind.
void validate(const FittedModel& model);

/// Read access to a series under the no-look-ahead contract: the forecast for
/// index i may only use observations with index < i − k, where k is the number
/// of unobserved days implied by the lead time.
class PredictionContext {
public:
    PredictionContext(const StationSeries& series, Date origin)
        : series_(series), origin_(origin), unobserved_(unobserved_days(series.lead_time_h)) {}

    [[nodiscard]] const StationSeries& series() const noexcept { return series_; }
    [[nodiscard]] int unobserved() const noexcept { return unobserved_; }
    [[nodiscard]] Eigen::Index observable_end(Eigen::Index i) const noexcept {
        return std::max<Eigen::Index>(0, i - unobserved_);
    }
    [[nodiscard]] double time_index(Eigen::Index i) const noexcept {
        return tsemos::time_index(origin_, series_.dates[static_cast<std::size_t>(i)]);
    }

private:
    const StationSeries& series_;
    Date origin_;
    int unobserved_;
};

[[nodiscard]] FittedModel fit_emos(const StationSeries& train, const FitOptions& options = {});
[[nodiscard]] FittedModel fit_ar_emos(const StationSeries& train, const FitOptions& options = {});
[[nodiscard]] FittedModel fit_semos(const StationSeries& train, const FitOptions& options = {});
[[nodiscard]] FittedModel fit_dar_semos(const StationSeries& train, const FitOptions& options = {});
[[nodiscard]] FittedModel fit_dar_garch_semos(const StationSeries& train, const FitOptions& options = {});
[[nodiscard]] FittedModel fit_sar_semos(const StationSeries& train, const FitOptions& options = {});

/// Dispatches to the fit function of `kind`. `train` must be gap-free and imputed.
[[nodiscard]] FittedModel fit_model(ModelKind kind, const StationSeries& train, const FitOptions& options = {});

/// Predictive distributions for rows [begin, end) of `series`. The series must
/// contain the history the model needs before `begin`; for the seasonal models
/// it must start on the training start date. Coefficients are not re-fitted,
/// except for EMOS and AR-EMOS which re-estimate on their rolling windows.
[[nodiscard]] std::vector<GaussianParams> predict(const FittedModel& model, const StationSeries& series,
                                                  std::size_t begin, std::size_t end,
                                                  const FitOptions& options = {});

/// In-sample one-step residuals y − μ̂ and standardized residuals (y − μ̂)/σ̂ of
/// a seasonal model over its training series.
struct TrainingResiduals {
    Eigen::VectorXd residual;
    Eigen::VectorXd standardized;
};

[[nodiscard]] TrainingResiduals training_residuals(const FittedModel& model, const StationSeries& train);

// Rolling-window building blocks, exposed for testing.

/// μ = a₀ + a₁x̄, log σ = b₀ + b₁ log s.
struct EmosCoeffs {
    double a0 = 0.0;
    double a1 = 1.0;
    double b0 = 0.0;
    double b1 = 1.0;
};

struct EmosWindowFit {
    EmosCoeffs coeffs;
    OptResult result;
    double initial_value = 0.0;  // objective at the least-squares start
    bool ridge = false;
};

/// CRPS-optimal EMOS coefficients on one window of (x̄, s, y).
[[nodiscard]] EmosWindowFit fit_emos_window(const Eigen::Ref<const Eigen::VectorXd>& ens_mean,
                                            const Eigen::Ref<const Eigen::VectorXd>& ens_sd,
                                            const Eigen::Ref<const Eigen::VectorXd>& obs,
                                            const OptimizeSettings& settings = {});

/// AR-adjusted ensemble summary for one target date.
struct ArAdjustedStats {
    double mu = 0.0;
    double sigma1 = 0.0;  // from the AR innovation variances
    double sigma2 = 0.0;  // spread of the adjusted members
};

[[nodiscard]] inline double ar_emos_sigma(const ArAdjustedStats& s, double weight) noexcept {
    return weight * s.sigma1 + (1.0 - weight) * s.sigma2;
}

/// Golden-section search for the weight in [0, 1] minimizing mean CRPS.
[[nodiscard]] double estimate_ar_emos_weight(std::span<const ArAdjustedStats> stats,
                                             const Eigen::Ref<const Eigen::VectorXd>& obs);

}  // namespace tsemos
