#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsemos {

using Date = std::chrono::sys_days;

/// Parses YYYY-MM-DD; throws ParseError on anything else.
[[nodiscard]] Date parse_date(std::string_view text);
[[nodiscard]] std::string format_date(Date date);

/// Running day index with t = 1 on `origin`. It keeps counting across year
/// boundaries, so the 365.25-day Fourier period stays in phase over leap years.
[[nodiscard]] inline double time_index(Date origin, Date date) noexcept {
    return static_cast<double>((date - origin).count()) + 1.0;
}

/// Number of days before the valid date whose observations are not yet known
/// at issuance: ⌈lead/24⌉ − 1.
[[nodiscard]] inline int unobserved_days(int lead_time_h) noexcept {
    return (lead_time_h + 23) / 24 - 1;
}

[[nodiscard]] inline bool is_missing(double value) noexcept { return std::isnan(value); }

struct EnsembleStats {
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample standard deviation (divisor m − 1) of m ≥ 2 finite members.
[[nodiscard]] EnsembleStats ensemble_stats(const Eigen::Ref<const Eigen::VectorXd>& members);

/// One station at one lead time: daily dates, observations (NaN = missing)
/// and the ensemble members, one row per date.
struct StationSeries {
    std::string station_id;
    int lead_time_h = 24;
    std::vector<Date> dates;
    Eigen::VectorXd obs;
    Eigen::MatrixXd members;
    Eigen::VectorXd ens_mean;
    Eigen::VectorXd ens_sd;

    [[nodiscard]] std::size_t size() const noexcept { return dates.size(); }
    [[nodiscard]] int member_count() const noexcept { return static_cast<int>(members.cols()); }
    [[nodiscard]] bool has_missing() const noexcept { return obs.array().isNaN().any(); }

    /// Index of `date`, if present.
    [[nodiscard]] std::optional<std::size_t> index_of(Date date) const noexcept;

    /// Dates in [first, last] (inclusive) as a contiguous copy.
    [[nodiscard]] StationSeries between(Date first, Date last) const;

    /// Rows [begin, end) as a contiguous copy.
    [[nodiscard]] StationSeries slice(std::size_t begin, std::size_t end) const;
};

/// Builds a series from members and observations, deriving the ensemble
/// statistics and checking every invariant.
[[nodiscard]] StationSeries make_station_series(std::string station_id, int lead_time_h, std::vector<Date> dates,
                                                Eigen::VectorXd obs, Eigen::MatrixXd members);

/// Throws (InvalidEnsemble / ParseError) if an invariant does not hold.
void validate(const StationSeries& series);

struct ImputationSettings {
    int half_window = 4;
    double decay = 0.5;
};

/// Symmetric exponentially weighted moving average: a missing value becomes the
/// weighted mean of the observed values at distance d ≤ k on either side with
/// weight λ^d. Observed values are left untouched.
[[nodiscard]] Eigen::VectorXd impute_missing(const Eigen::Ref<const Eigen::VectorXd>& obs,
                                             const ImputationSettings& settings = {});

/// Copy of `series` with every missing observation imputed.
[[nodiscard]] StationSeries imputed(StationSeries series, const ImputationSettings& settings = {});

/// Reads every (station, lead) series in a CSV file.
[[nodiscard]] std::vector<StationSeries> read_station_csv(const std::filesystem::path& path);

/// Reads the rows of one (station, lead) tuple.
[[nodiscard]] StationSeries load_station_csv(const std::filesystem::path& path, std::string_view station_id,
                                             int lead_time_h);

/// Writes series in the station CSV schema. Values carry 10 decimals so a
/// write/read cycle is exact to well below 1e-9.
void write_station_csv(const std::filesystem::path& path, std::span<const StationSeries> series);

}  // namespace tsemos
