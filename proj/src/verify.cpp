#include "tsemos/verify.hpp"

#include "tsemos/distributions.hpp"
#include "tsemos/error.hpp"
#include "tsemos/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <utility>

namespace tsemos {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

using Cell = std::pair<std::string, int>;

double one_sided_p(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    try {
        return dm_test(a, b, Alternative::ABetter).p_value;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateDifferential) throw;
        // A constant differential: certain if a is strictly lower, otherwise no evidence.
        return (a - b).mean() < 0.0 ? 0.0 : 1.0;
    }
}

}  // namespace

DMResult dm_test(const Eigen::Ref<const Eigen::VectorXd>& score_a, const Eigen::Ref<const Eigen::VectorXd>& score_b,
                 Alternative alternative) {
    const Eigen::Index n = score_a.size();
    if (n != score_b.size()) throw Error(ErrorCode::AlignmentError, "dm_test: series lengths differ");
    if (n < 10) throw Error(ErrorCode::InvalidInput, "dm_test: need at least 10 cases");
    if (!score_a.allFinite() || !score_b.allFinite()) throw Error(ErrorCode::InvalidInput, "dm_test: non-finite score");

    const Eigen::VectorXd d = score_a - score_b;
    const double mean = d.mean();
    const Eigen::VectorXd c = d.array() - mean;
    const double nd = static_cast<double>(n);
    const int lag = static_cast<int>(std::floor(std::cbrt(nd)));
    double lrv = c.squaredNorm() / nd;
    const double scale = d.squaredNorm() / nd;
    if (!(lrv > 1e-14 * scale) || lrv == 0.0) {
        throw Error(ErrorCode::DegenerateDifferential, "dm_test: score differential has zero variance");
    }
    for (int l = 1; l <= lag && l < n; ++l) {
        const double gamma = c.tail(n - l).dot(c.head(n - l)) / nd;
        lrv += 2.0 * (1.0 - l / (lag + 1.0)) * gamma;
    }
    if (!(lrv > 0.0)) throw Error(ErrorCode::DegenerateDifferential, "dm_test: long-run variance is not positive");

    DMResult r;
    r.statistic = mean / std::sqrt(lrv / nd);
    switch (alternative) {
        case Alternative::ABetter: r.p_value = normal_cdf(r.statistic); break;
        case Alternative::BBetter: r.p_value = normal_cdf(-r.statistic); break;
        case Alternative::TwoSided: r.p_value = std::min(1.0, 2.0 * normal_cdf(-std::fabs(r.statistic))); break;
    }
    return r;
}

std::vector<bool> benjamini_hochberg(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidInput, "benjamini_hochberg: p outside [0, 1]");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::size_t cutoff = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (p_values[order[i]] <= static_cast<double>(i + 1) * alpha / static_cast<double>(m)) cutoff = i + 1;
    }
    std::vector<bool> reject(m, false);
    for (std::size_t i = 0; i < cutoff; ++i) reject[order[i]] = true;
    return reject;
}

Eigen::VectorXd ScoreRow::crps_series() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(cases.size()));
    for (std::size_t i = 0; i < cases.size(); ++i) v[static_cast<Eigen::Index>(i)] = cases[i].crps;
    return v;
}

void ScoreTable::add(std::string method, std::string station_id, int lead_time_h, std::vector<Date> dates,
                     ScoreSample cases) {
    if (dates.size() != cases.size()) throw Error(ErrorCode::InvalidInput, "score rows need one date per case");
    ScoreRow row;
    row.summary = summarize(cases);
    row.method = std::move(method);
    row.station_id = std::move(station_id);
    row.lead_time_h = lead_time_h;
    row.dates = std::move(dates);
    row.cases = std::move(cases);
    rows_.push_back(std::move(row));
}

std::vector<std::string> ScoreTable::methods() const {
    std::vector<std::string> out;
    for (const ScoreRow& r : rows_) {
        if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
    }
    return out;
}

const ScoreRow* ScoreTable::find(std::string_view method, std::string_view station_id, int lead_time_h) const {
    for (const ScoreRow& r : rows_) {
        if (r.method == method && r.station_id == station_id && r.lead_time_h == lead_time_h) return &r;
    }
    return nullptr;
}

ScoreSummary ScoreTable::method_summary(std::string_view method) const {
    ScoreSample all;
    for (const ScoreRow& r : rows_) {
        if (r.method == method) all.insert(all.end(), r.cases.begin(), r.cases.end());
    }
    return summarize(all);
}

SignificanceMatrix significance_matrix(const ScoreTable& table, double alpha) {
    SignificanceMatrix out;
    out.methods = table.methods();
    const auto k = static_cast<Eigen::Index>(out.methods.size());
    out.percent = Eigen::MatrixXd::Zero(k, k);
    if (k == 0) return out;

    std::set<Cell> cells;
    for (const ScoreRow& r : table.rows()) cells.emplace(r.station_id, r.lead_time_h);
    std::vector<std::vector<const ScoreRow*>> grid(static_cast<std::size_t>(k));
    for (Eigen::Index m = 0; m < k; ++m) {
        for (const Cell& c : cells) {
            const ScoreRow* row = table.find(out.methods[static_cast<std::size_t>(m)], c.first, c.second);
            if (!row) {
                throw Error(ErrorCode::AlignmentError, "method " + out.methods[static_cast<std::size_t>(m)] +
                                                           " has no scores for " + c.first + " lead " +
                                                           std::to_string(c.second));
            }
            if (m > 0 && row->dates != grid[0][grid[static_cast<std::size_t>(m)].size()]->dates) {
                throw Error(ErrorCode::AlignmentError, "dates differ between methods for " + c.first + " lead " +
                                                           std::to_string(c.second));
            }
            grid[static_cast<std::size_t>(m)].push_back(row);
        }
    }

    std::vector<Eigen::VectorXd> series(static_cast<std::size_t>(k) * cells.size());
    for (std::size_t m = 0; m < grid.size(); ++m) {
        for (std::size_t c = 0; c < cells.size(); ++c) series[m * cells.size() + c] = grid[m][c]->crps_series();
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i == j) continue;
            std::vector<double> p(cells.size());
            for (std::size_t c = 0; c < cells.size(); ++c) {
                p[c] = one_sided_p(series[static_cast<std::size_t>(i) * cells.size() + c],
                                   series[static_cast<std::size_t>(j) * cells.size() + c]);
            }
            const std::vector<bool> reject = benjamini_hochberg(p, alpha);
            const auto hits = std::count(reject.begin(), reject.end(), true);
            out.percent(i, j) = 100.0 * static_cast<double>(hits) / static_cast<double>(cells.size());
        }
    }
    return out;
}

std::string_view to_string(ResidualKind kind) noexcept {
    switch (kind) {
        case ResidualKind::Plain: return "residual";
        case ResidualKind::Squared: return "squared";
        case ResidualKind::StandardizedSquared: return "standardized_squared";
    }
    return "?";
}

std::vector<ResidualDependenceRow> residual_dependence_table(std::span<const ResidualSet> sets,
                                                            std::span<const int> lags, double alpha) {
    std::vector<ResidualDependenceRow> rows;
    for (const ResidualSet& set : sets) {
        if (set.stations.empty()) continue;
        for (ResidualKind kind : {ResidualKind::Plain, ResidualKind::Squared, ResidualKind::StandardizedSquared}) {
            for (int lag : lags) {
                std::vector<double> p;
                p.reserve(set.stations.size());
                for (const TrainingResiduals& res : set.stations) {
                    Eigen::VectorXd x;
                    switch (kind) {
                        case ResidualKind::Plain: x = res.residual; break;
                        case ResidualKind::Squared: x = res.residual.array().square().matrix(); break;
                        case ResidualKind::StandardizedSquared: x = res.standardized.array().square().matrix(); break;
                    }
                    try {
                        p.push_back(ljung_box(x, lag).p_value);
                    } catch (const Error& e) {
                        if (e.code() != ErrorCode::DegenerateSeries) throw;
                        p.push_back(1.0);
                    }
                }
                const std::vector<bool> reject = benjamini_hochberg(p, alpha);
                ResidualDependenceRow row;
                row.method = set.method;
                row.kind = kind;
                row.lag = lag;
                row.stations = static_cast<int>(p.size());
                row.percent = 100.0 * static_cast<double>(std::count(reject.begin(), reject.end(), true)) /
                              static_cast<double>(p.size());
                rows.push_back(row);
            }
        }
    }
    return rows;
}

PitHistogram pit_histogram(std::span<const double> pit, int bins) {
    if (bins < 2) throw Error(ErrorCode::InvalidInput, "pit_histogram: need at least 2 bins");
    PitHistogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    h.n = pit.size();
    double sum = 0.0;
    for (double u : pit) {
        if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::InvalidPIT, "PIT value outside [0, 1]");
        const int b = std::min(bins - 1, static_cast<int>(u * bins));
        ++h.counts[static_cast<std::size_t>(b)];
        sum += u;
    }
    if (h.n >= 2) {
        const double mean = sum / static_cast<double>(h.n);
        double ss = 0.0;
        for (double u : pit) ss += (u - mean) * (u - mean);
        h.variance = ss / static_cast<double>(h.n - 1);
    }
    return h;
}

KSResult ks_uniform(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "ks_uniform: no values");
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = std::clamp(x[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
    }
    const double sn = std::sqrt(n);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    if (lambda < 0.2) {
        p = 1.0;
    } else {
        for (int k = 1; k <= 100; ++k) {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            p += (k % 2 == 1 ? 2.0 : -2.0) * term;
            if (term < 1e-16) break;
        }
    }
    return {d, std::clamp(p, 0.0, 1.0)};
}

void write_score_table_csv(const std::filesystem::path& path, const ScoreTable& table) {
    std::ofstream out = open_csv(path);
    out << "method,station_id,lead_time_h,n,crps,logs,rmse,width,coverage\n";
    for (const ScoreRow& r : table.rows()) {
        const ScoreSummary& s = r.summary;
        out << r.method << ',' << r.station_id << ',' << r.lead_time_h << ',' << s.n << ',' << fmt(s.crps) << ','
            << fmt(s.logs) << ',' << fmt(s.rmse) << ',' << fmt(s.width) << ',' << fmt(s.coverage) << '\n';
    }
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

void write_significance_csv(const std::filesystem::path& path, const SignificanceMatrix& matrix) {
    std::ofstream out = open_csv(path);
    out << "method";
    for (const std::string& m : matrix.methods) out << ',' << m;
    out << '\n';
    for (std::size_t i = 0; i < matrix.methods.size(); ++i) {
        out << matrix.methods[i];
        for (std::size_t j = 0; j < matrix.methods.size(); ++j) {
            out << ',' << fmt(matrix.percent(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

void write_pit_csv(const std::filesystem::path& path, std::span<const PitSummary> rows) {
    std::ofstream out = open_csv(path);
    std::size_t bins = rows.empty() ? 0 : rows.front().histogram.counts.size();
    out << "method,n,variance";
    for (std::size_t b = 1; b <= bins; ++b) out << ",bin_" << b;
    out << '\n';
    for (const PitSummary& r : rows) {
        if (r.histogram.counts.size() != bins) throw Error(ErrorCode::InvalidInput, "PIT rows differ in bin count");
        out << r.method << ',' << r.histogram.n << ',' << fmt(r.histogram.variance);
        for (int c : r.histogram.counts) out << ',' << c;
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

void write_residual_dependence_csv(const std::filesystem::path& path, std::span<const ResidualDependenceRow> rows) {
    std::ofstream out = open_csv(path);
    out << "method,residual,lag,percent_significant,stations\n";
    for (const ResidualDependenceRow& r : rows) {
        out << r.method << ',' << to_string(r.kind) << ',' << r.lag << ',' << fmt(r.percent) << ',' << r.stations
            << '\n';
    }
    if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

}  // namespace tsemos
