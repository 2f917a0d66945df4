#include "tsemos/scoring.hpp"
#include "tsemos/distributions.hpp"
#include "tsemos/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <queue>
#include <vector>

namespace tsemos {

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

void require_valid(const GaussianParams& g) {
    if (!g.valid()) {
        throw Error(ErrorCode::InvalidInput, "Gaussian parameters require finite mu and sigma > 0");
    }
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXgk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                     0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                     0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                     0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                     0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                     0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                     0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment kronrod15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double sum = f(center - dx) + f(center + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) {
            gauss += kWg[j / 2] * sum;
        }
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

double crps_normal(const GaussianParams& g, double y) {
    require_valid(g);
    const double z = (y - g.mu) / g.sigma;
    return g.sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

CrpsGradient crps_normal_gradient(const GaussianParams& g, double y) {
    require_valid(g);
    const double z = (y - g.mu) / g.sigma;
    return {1.0 - 2.0 * normal_cdf(z), 2.0 * normal_pdf(z) - kInvSqrtPi};
}

double crps_integral(const std::function<double(double)>& cdf, double y, double tol,
                     std::span<const double> breakpoints) {
    // Both half-lines are mapped onto [0, 1) through z = y ∓ u/(1−u).
    auto left = [&](double u) {
        const double v = 1.0 - u;
        const double f = cdf(y - u / v);
        return f * f / (v * v);
    };
    auto right = [&](double u) {
        const double v = 1.0 - u;
        const double f = 1.0 - cdf(y + u / v);
        return f * f / (v * v);
    };
    auto integrand = [&](double s) { return s < 1.0 ? left(s) : right(s - 1.0); };

    std::vector<double> cuts{0.0, 0.5, 1.0, 1.5, 2.0};
    for (double z : breakpoints) {
        if (!std::isfinite(z)) continue;
        const double d = std::fabs(z - y);
        const double u = d / (1.0 + d);
        cuts.push_back(z < y ? u : 1.0 + u);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Segment> work;
    double total = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Segment s = kronrod15(integrand, cuts[i], cuts[i + 1]);
        total += s.value;
        error += s.error;
        work.push(s);
    }
    constexpr int kMaxSegments = 50000;
    auto segments = static_cast<int>(work.size());
    while (error > tol) {
        if (segments >= kMaxSegments) {
            throw Error(ErrorCode::NumericalFailure, "crps_integral: quadrature did not reach tolerance");
        }
        const Segment worst = work.top();
        work.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment lo = kronrod15(integrand, worst.a, mid);
        const Segment hi = kronrod15(integrand, mid, worst.b);
        total += lo.value + hi.value - worst.value;
        error += lo.error + hi.error - worst.error;
        work.push(lo);
        work.push(hi);
        ++segments;
    }
    if (!std::isfinite(total)) {
        throw Error(ErrorCode::NumericalFailure, "crps_integral: non-finite integral");
    }
    return total;
}

double crps_ensemble(const Eigen::Ref<const Eigen::VectorXd>& members, double y) {
    const Eigen::Index m = members.size();
    if (m < 1) {
        throw Error(ErrorCode::InvalidEnsemble, "crps_ensemble: need at least one member");
    }
    Eigen::VectorXd sorted = members;
    std::sort(sorted.begin(), sorted.end());
    const double md = static_cast<double>(m);
    double spread = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        spread += (2.0 * (i + 1) - md - 1.0) * sorted[i];
    }
    const double accuracy = (sorted.array() - y).abs().mean();
    // ΣΣ|x_i − x_j| = 2 Σ (2i − m − 1) x_(i)
    return std::max(0.0, accuracy - spread / (md * md));
}

double logs_normal(const GaussianParams& g, double y) {
    require_valid(g);
    const double z = (y - g.mu) / g.sigma;
    return std::log(g.sigma) + 0.5 * std::log(2.0 * std::numbers::pi) + 0.5 * z * z;
}

double pit_normal(const GaussianParams& g, double y) {
    require_valid(g);
    return normal_cdf((y - g.mu) / g.sigma);
}

CentralInterval central_interval(const GaussianParams& g, double level, double y) {
    require_valid(g);
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::InvalidLevel, "central_interval: level must lie in (0, 1)");
    }
    const double q = normal_quantile(0.5 + 0.5 * level);
    CentralInterval ci;
    ci.lower = g.mu - q * g.sigma;
    ci.upper = g.mu + q * g.sigma;
    ci.width = ci.upper - ci.lower;
    ci.covered = ci.lower <= y && y <= ci.upper;
    return ci;
}

int verification_rank(const Eigen::Ref<const Eigen::VectorXd>& members, double y, std::mt19937_64& rng) {
    if (members.size() < 1) {
        throw Error(ErrorCode::InvalidEnsemble, "verification_rank: need at least one member");
    }
    const auto below = static_cast<int>((members.array() < y).count());
    const auto ties = static_cast<int>((members.array() == y).count());
    if (ties == 0) {
        return below + 1;
    }
    std::uniform_int_distribution<int> pick(0, ties);
    return below + 1 + pick(rng);
}

CaseScore score_gaussian(const GaussianParams& g, double y, double level) {
    CaseScore s;
    s.crps = crps_normal(g, y);
    s.logs = logs_normal(g, y);
    s.se = (g.mu - y) * (g.mu - y);
    s.pit = pit_normal(g, y);
    const CentralInterval ci = central_interval(g, level, y);
    s.width = ci.width;
    s.covered = ci.covered;
    return s;
}

CaseScore score_ensemble(const Eigen::Ref<const Eigen::VectorXd>& members, double y, std::mt19937_64& rng) {
    CaseScore s;
    s.crps = crps_ensemble(members, y);
    s.logs = std::numeric_limits<double>::quiet_NaN();
    const double mean = members.mean();
    s.se = (mean - y) * (mean - y);
    const int rank = verification_rank(members, y, rng);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    s.pit = (rank - 1 + jitter(rng)) / static_cast<double>(members.size() + 1);
    const double lo = members.minCoeff();
    const double hi = members.maxCoeff();
    s.width = hi - lo;
    s.covered = lo <= y && y <= hi;
    return s;
}

ScoreSummary summarize(std::span<const CaseScore> scores) {
    if (scores.empty()) {
        throw Error(ErrorCode::EmptyInput, "summarize: no verification cases");
    }
    ScoreSummary out;
    out.n = scores.size();
    double se = 0.0;
    std::size_t covered = 0;
    for (const CaseScore& s : scores) {
        out.crps += s.crps;
        out.logs += s.logs;
        se += s.se;
        out.width += s.width;
        covered += s.covered ? 1 : 0;
    }
    const double n = static_cast<double>(out.n);
    out.crps /= n;
    out.logs /= n;
    out.width /= n;
    out.rmse = std::sqrt(se / n);
    out.coverage = 100.0 * static_cast<double>(covered) / n;
    return out;
}

double crpss(double mean_crps, double mean_crps_ref) {
    if (!(mean_crps_ref > 0.0)) {
        throw Error(ErrorCode::InvalidReference, "crpss: reference CRPS must be positive");
    }
    return 1.0 - mean_crps / mean_crps_ref;
}

}  // namespace tsemos
