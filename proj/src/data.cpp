#include "tsemos/data.hpp"
#include "tsemos/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

namespace tsemos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Error parse_error(std::size_t row, const std::string& message) {
    return Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": " + message);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::optional<int> parse_int(std::string_view text) {
    text = trim(text);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

struct PendingSeries {
    std::string station_id;
    int lead = 0;
    std::vector<Date> dates;
    std::vector<double> obs;
    std::vector<double> members;  // row-major
};

}  // namespace

Date parse_date(std::string_view text) {
    text = trim(text);
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const auto y = parse_int(text.substr(0, 4));
    const auto m = parse_int(text.substr(5, 2));
    const auto d = parse_int(text.substr(8, 2));
    if (!y || !m || !d) {
        throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                          std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) {
        throw Error(ErrorCode::ParseError, "invalid calendar date '" + std::string(text) + "'");
    }
    return Date{ymd};
}

std::string format_date(Date date) {
    const std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

EnsembleStats ensemble_stats(const Eigen::Ref<const Eigen::VectorXd>& members) {
    if (members.size() < 2) {
        throw Error(ErrorCode::InvalidEnsemble, "ensemble needs at least 2 members");
    }
    if (!members.allFinite()) {
        throw Error(ErrorCode::InvalidEnsemble, "ensemble member is not finite");
    }
    const double mean = members.mean();
    const double ss = (members.array() - mean).square().sum();
    return {mean, std::sqrt(ss / static_cast<double>(members.size() - 1))};
}

std::optional<std::size_t> StationSeries::index_of(Date date) const noexcept {
    if (dates.empty() || date < dates.front() || date > dates.back()) {
        return std::nullopt;
    }
    // Dates are consecutive, so the offset is the index.
    return static_cast<std::size_t>((date - dates.front()).count());
}

StationSeries StationSeries::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) {
        throw Error(ErrorCode::InvalidInput, "slice: range out of bounds");
    }
    const auto b = static_cast<Eigen::Index>(begin);
    const auto n = static_cast<Eigen::Index>(end - begin);
    StationSeries out;
    out.station_id = station_id;
    out.lead_time_h = lead_time_h;
    out.dates.assign(dates.begin() + b, dates.begin() + b + n);
    out.obs = obs.segment(b, n);
    out.members = members.middleRows(b, n);
    out.ens_mean = ens_mean.segment(b, n);
    out.ens_sd = ens_sd.segment(b, n);
    return out;
}

StationSeries StationSeries::between(Date first, Date last) const {
    if (dates.empty() || last < first) {
        return slice(0, 0);
    }
    const Date lo = std::max(first, dates.front());
    const Date hi = std::min(last, dates.back());
    if (hi < lo) {
        return slice(0, 0);
    }
    return slice(*index_of(lo), *index_of(hi) + 1);
}

StationSeries make_station_series(std::string station_id, int lead_time_h, std::vector<Date> dates,
                                  Eigen::VectorXd obs, Eigen::MatrixXd members) {
    StationSeries s;
    s.station_id = std::move(station_id);
    s.lead_time_h = lead_time_h;
    s.dates = std::move(dates);
    s.obs = std::move(obs);
    s.members = std::move(members);
    const auto n = static_cast<Eigen::Index>(s.dates.size());
    if (s.obs.size() != n || s.members.rows() != n) {
        throw Error(ErrorCode::InvalidInput, "series components have inconsistent lengths");
    }
    s.ens_mean.resize(n);
    s.ens_sd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const EnsembleStats st = ensemble_stats(s.members.row(i).transpose());
        s.ens_mean[i] = st.mean;
        s.ens_sd[i] = st.sd;
    }
    validate(s);
    return s;
}

void validate(const StationSeries& s) {
    const auto n = static_cast<Eigen::Index>(s.dates.size());
    if (s.obs.size() != n || s.members.rows() != n || s.ens_mean.size() != n || s.ens_sd.size() != n) {
        throw Error(ErrorCode::InvalidInput, "series components have inconsistent lengths");
    }
    if (n > 0 && s.members.cols() < 2) {
        throw Error(ErrorCode::InvalidEnsemble, "ensemble needs at least 2 members");
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if ((s.dates[i] - s.dates[i - 1]).count() != 1) {
            throw Error(ErrorCode::ParseError, "dates are not consecutive at " + format_date(s.dates[i]));
        }
    }
    if (!s.members.allFinite()) {
        throw Error(ErrorCode::InvalidEnsemble, "ensemble members must be finite");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(s.ens_sd[i] > 0.0)) {
            throw Error(ErrorCode::InvalidEnsemble,
                        "degenerate ensemble (zero spread) on " + format_date(s.dates[i]));
        }
        if (std::isinf(s.obs[i])) {
            throw Error(ErrorCode::InvalidInput, "infinite observation on " + format_date(s.dates[i]));
        }
    }
}

Eigen::VectorXd impute_missing(const Eigen::Ref<const Eigen::VectorXd>& obs, const ImputationSettings& settings) {
    if (settings.half_window < 1 || !(settings.decay > 0.0 && settings.decay < 1.0)) {
        throw Error(ErrorCode::InvalidInput, "impute_missing: need k >= 1 and decay in (0, 1)");
    }
    const Eigen::Index n = obs.size();
    Eigen::VectorXd out = obs;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!is_missing(obs[i])) continue;
        double weighted = 0.0;
        double total = 0.0;
        for (int d = 1; d <= settings.half_window; ++d) {
            const double w = std::pow(settings.decay, d);
            if (i - d >= 0 && !is_missing(obs[i - d])) {
                weighted += w * obs[i - d];
                total += w;
            }
            if (i + d < n && !is_missing(obs[i + d])) {
                weighted += w * obs[i + d];
                total += w;
            }
        }
        if (total == 0.0) {
            throw Error(ErrorCode::ImputationFailure,
                        "no observed value within " + std::to_string(settings.half_window) +
                            " days of missing index " + std::to_string(i));
        }
        out[i] = weighted / total;
    }
    return out;
}

StationSeries imputed(StationSeries series, const ImputationSettings& settings) {
    try {
        series.obs = impute_missing(series.obs, settings);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ImputationFailure) throw;
        throw Error(ErrorCode::ImputationFailure,
                    series.station_id + "/" + std::to_string(series.lead_time_h) + "h: " + e.what());
    }
    return series;
}

std::vector<StationSeries> read_station_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IOError, "cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw parse_error(1, "missing header in " + path.string());
    }
    const auto header = split(trim(line), ',');
    if (header.size() < 6 || trim(header[0]) != "station_id" || trim(header[1]) != "date" ||
        trim(header[2]) != "lead_time_h" || trim(header[3]) != "obs") {
        throw parse_error(1, "header must be station_id,date,lead_time_h,obs,m1,...,mM");
    }
    const std::size_t m = header.size() - 4;
    for (std::size_t j = 0; j < m; ++j) {
        if (trim(header[4 + j]) != "m" + std::to_string(j + 1)) {
            throw parse_error(1, "member column " + std::to_string(j + 1) + " must be named m" +
                                     std::to_string(j + 1));
        }
    }

    std::vector<PendingSeries> groups;
    std::map<std::pair<std::string, int>, std::size_t> lookup;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view content = trim(line);
        if (content.empty()) continue;
        const auto fields = split(content, ',');
        if (fields.size() != header.size()) {
            throw parse_error(row, "expected " + std::to_string(header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
        }
        const std::string station(trim(fields[0]));
        if (station.empty()) throw parse_error(row, "empty station_id");
        Date date;
        try {
            date = parse_date(fields[1]);
        } catch (const Error& e) {
            throw parse_error(row, e.what());
        }
        const auto lead = parse_int(fields[2]);
        if (!lead || *lead <= 0) throw parse_error(row, "invalid lead_time_h");
        double obs = kNaN;
        if (!trim(fields[3]).empty()) {
            const auto v = parse_double(fields[3]);
            if (!v || !std::isfinite(*v)) throw parse_error(row, "invalid obs value");
            obs = *v;
        }

        const auto key = std::make_pair(station, *lead);
        auto [it, inserted] = lookup.try_emplace(key, groups.size());
        if (inserted) {
            groups.push_back(PendingSeries{station, *lead, {}, {}, {}});
        }
        PendingSeries& g = groups[it->second];
        if (!g.dates.empty()) {
            const auto step = (date - g.dates.back()).count();
            if (step == 0) throw parse_error(row, "duplicated date " + format_date(date));
            if (step < 0) throw parse_error(row, "date " + format_date(date) + " is not increasing");
            if (step > 1) throw parse_error(row, "date gap before " + format_date(date));
        }
        g.dates.push_back(date);
        g.obs.push_back(obs);
        for (std::size_t j = 0; j < m; ++j) {
            const auto v = parse_double(fields[4 + j]);
            if (!v || !std::isfinite(*v)) {
                throw parse_error(row, "invalid member value m" + std::to_string(j + 1));
            }
            g.members.push_back(*v);
        }
    }

    std::vector<StationSeries> out;
    out.reserve(groups.size());
    for (PendingSeries& g : groups) {
        const auto n = static_cast<Eigen::Index>(g.dates.size());
        Eigen::VectorXd obs = Eigen::Map<const Eigen::VectorXd>(g.obs.data(), n);
        Eigen::MatrixXd members =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                g.members.data(), n, static_cast<Eigen::Index>(m));
        out.push_back(make_station_series(g.station_id, g.lead, std::move(g.dates), std::move(obs),
                                          std::move(members)));
    }
    return out;
}

StationSeries load_station_csv(const std::filesystem::path& path, std::string_view station_id, int lead_time_h) {
    for (StationSeries& s : read_station_csv(path)) {
        if (s.station_id == station_id && s.lead_time_h == lead_time_h) {
            return std::move(s);
        }
    }
    throw Error(ErrorCode::ParseError, "no rows for station " + std::string(station_id) + " at lead " +
                                           std::to_string(lead_time_h) + "h in " + path.string());
}

void write_station_csv(const std::filesystem::path& path, std::span<const StationSeries> series) {
    if (series.empty()) {
        throw Error(ErrorCode::InvalidInput, "write_station_csv: nothing to write");
    }
    const int m = series.front().member_count();
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IOError, "cannot write " + path.string());
    }
    out << "station_id,date,lead_time_h,obs";
    for (int j = 1; j <= m; ++j) out << ",m" << j;
    out << '\n';
    char buf[64];
    for (const StationSeries& s : series) {
        if (s.member_count() != m) {
            throw Error(ErrorCode::InvalidInput, "write_station_csv: member count differs between series");
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto r = static_cast<Eigen::Index>(i);
            out << s.station_id << ',' << format_date(s.dates[i]) << ',' << s.lead_time_h << ',';
            if (!is_missing(s.obs[r])) {
                std::snprintf(buf, sizeof buf, "%.10f", s.obs[r]);
                out << buf;
            }
            for (int j = 0; j < m; ++j) {
                std::snprintf(buf, sizeof buf, ",%.10f", s.members(r, j));
                out << buf;
            }
            out << '\n';
        }
    }
    if (!out) {
        throw Error(ErrorCode::IOError, "failed writing " + path.string());
    }
}

}  // namespace tsemos
