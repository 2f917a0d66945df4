#pragma once

#include "tsemos/data.hpp"
#include "tsemos/models.hpp"
#include "tsemos/scoring.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tsemos {

enum class Alternative { ABetter, BBetter, TwoSided };

struct DMResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Diebold-Mariano test on d = a − b (lower scores are better) with a Bartlett
/// HAC long-run variance at lag ⌊n^{1/3}⌋ and a normal reference.
/// Throws DegenerateDifferential when the long-run variance vanishes.
[[nodiscard]] DMResult dm_test(const Eigen::Ref<const Eigen::VectorXd>& score_a,
                               const Eigen::Ref<const Eigen::VectorXd>& score_b, Alternative alternative);

/// Step-up rejection flags at false discovery rate `alpha`.
[[nodiscard]] std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double alpha = 0.05);

struct ScoreRow {
    std::string method;
    std::string station_id;
    int lead_time_h = 24;
    std::vector<Date> dates;
    ScoreSample cases;
    ScoreSummary summary;

    [[nodiscard]] Eigen::VectorXd crps_series() const;
};

/// Per (method, station, lead) aggregates with the per-case scores retained.
class ScoreTable {
public:
    /// Throws EmptyInput for an empty sample and InvalidInput on length mismatch.
    void add(std::string method, std::string station_id, int lead_time_h, std::vector<Date> dates, ScoreSample cases);

    [[nodiscard]] const std::vector<ScoreRow>& rows() const noexcept { return rows_; }
    /// Methods in insertion order.
    [[nodiscard]] std::vector<std::string> methods() const;
    [[nodiscard]] const ScoreRow* find(std::string_view method, std::string_view station_id, int lead_time_h) const;
    /// Summary over every row of one method.
    [[nodiscard]] ScoreSummary method_summary(std::string_view method) const;

private:
    std::vector<ScoreRow> rows_;
};

/// percent(i, j): share of (station, lead) cells where method i beats method j
/// in a one-sided DM test after BH correction across the cells of the pair.
struct SignificanceMatrix {
    std::vector<std::string> methods;
    Eigen::MatrixXd percent;
};

/// Throws AlignmentError unless every method covers the same cells and dates.
[[nodiscard]] SignificanceMatrix significance_matrix(const ScoreTable& table, double alpha = 0.05);

enum class ResidualKind { Plain, Squared, StandardizedSquared };

[[nodiscard]] std::string_view to_string(ResidualKind kind) noexcept;

struct ResidualSet {
    std::string method;
    std::vector<TrainingResiduals> stations;
};

struct ResidualDependenceRow {
    std::string method;
    ResidualKind kind = ResidualKind::Plain;
    int lag = 1;
    double percent = 0.0;
    int stations = 0;
};

/// Ljung-Box tests per station on ε̂, ε̂² and (ε̂/σ̂)², BH-corrected across
/// stations; each row reports the percentage of rejections.
[[nodiscard]] std::vector<ResidualDependenceRow> residual_dependence_table(std::span<const ResidualSet> sets,
                                                                          std::span<const int> lags,
                                                                          double alpha = 0.05);

struct PitHistogram {
    std::vector<int> counts;
    double variance = 0.0;
    std::size_t n = 0;
};

/// Equal-width bins on [0, 1] (1 falls in the last bin) and the sample variance.
/// Throws InvalidPIT for values outside [0, 1].
[[nodiscard]] PitHistogram pit_histogram(std::span<const double> pit, int bins);

struct KSResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against U(0, 1).
[[nodiscard]] KSResult ks_uniform(std::span<const double> values);

// CSV exports, 6 decimals.

/// method,station_id,lead_time_h,n,crps,logs,rmse,width,coverage
void write_score_table_csv(const std::filesystem::path& path, const ScoreTable& table);
/// method,<method_1>,...,<method_k>
void write_significance_csv(const std::filesystem::path& path, const SignificanceMatrix& matrix);

struct PitSummary {
    std::string method;
    PitHistogram histogram;
};
/// method,n,variance,bin_1,...,bin_B
void write_pit_csv(const std::filesystem::path& path, std::span<const PitSummary> rows);
/// method,residual,lag,percent_significant,stations
void write_residual_dependence_csv(const std::filesystem::path& path,
                                   std::span<const ResidualDependenceRow> rows);

}  // namespace tsemos
