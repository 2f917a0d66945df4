#include "tsemos/timeseries.hpp"
#include "tsemos/distributions.hpp"
#include "tsemos/error.hpp"
#include "tsemos/log.hpp"
#include "tsemos/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsemos {

namespace {

void require_nondegenerate(const Eigen::Ref<const Eigen::VectorXd>& x, double c0) {
    const double scale = x.cwiseAbs().maxCoeff();
    if (!(c0 > 1e-24 * (1.0 + scale * scale))) {
        throw Error(ErrorCode::DegenerateSeries, "series is constant (zero sample variance)");
    }
}

}  // namespace

Eigen::VectorXd autocovariance(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag) {
    const Eigen::Index n = x.size();
    if (n < 2 || max_lag < 0 || max_lag >= n) {
        throw Error(ErrorCode::InvalidInput, "autocovariance: need n >= 2 and 0 <= max_lag < n");
    }
    if (!x.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "autocovariance: series contains non-finite values");
    }
    const Eigen::VectorXd centered = x.array() - x.mean();
    Eigen::VectorXd c(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k) {
        c[k] = centered.head(n - k).dot(centered.tail(n - k)) / static_cast<double>(n);
    }
    return c;
}

Eigen::VectorXd acf(const Eigen::Ref<const Eigen::VectorXd>& x, int max_lag) {
    if (max_lag < 1) {
        throw Error(ErrorCode::InvalidInput, "acf: max_lag must be >= 1");
    }
    const Eigen::VectorXd c = autocovariance(x, max_lag);
    require_nondegenerate(x, c[0]);
    return c.tail(max_lag) / c[0];
}

LevinsonDurbin levinson_durbin(const Eigen::Ref<const Eigen::VectorXd>& autocov, int max_order) {
    if (max_order < 0 || autocov.size() < max_order + 1) {
        throw Error(ErrorCode::InvalidInput, "levinson_durbin: need autocovariances up to max_order");
    }
    LevinsonDurbin out;
    out.coefficients.reserve(max_order + 1);
    out.coefficients.emplace_back();
    out.innovation_variance.resize(max_order + 1);
    out.innovation_variance[0] = autocov[0];

    Eigen::VectorXd phi;
    double v = autocov[0];
    for (int k = 1; k <= max_order; ++k) {
        double acc = autocov[k];
        for (int j = 1; j < k; ++j) {
            acc -= phi[j - 1] * autocov[k - j];
        }
        const double reflection = acc / v;
        Eigen::VectorXd next(k);
        for (int j = 1; j < k; ++j) {
            next[j - 1] = phi[j - 1] - reflection * phi[k - j - 1];
        }
        next[k - 1] = reflection;
        v *= (1.0 - reflection * reflection);
        phi = std::move(next);
        out.coefficients.push_back(phi);
        out.innovation_variance[k] = v;
    }
    return out;
}

int default_max_ar_order(std::size_t n) noexcept {
    if (n < 3) return 0;
    const int by_length = static_cast<int>(std::floor(10.0 * std::log10(static_cast<double>(n))));
    return std::clamp(std::min(20, by_length), 0, static_cast<int>(n) - 2);
}

ARCoeffs fit_ar_yule_walker(const Eigen::Ref<const Eigen::VectorXd>& x, int max_order) {
    const auto n = static_cast<std::size_t>(x.size());
    if (max_order < 0) {
        max_order = default_max_ar_order(n);
    }
    if (n < 2 || static_cast<std::size_t>(max_order) + 1 >= n) {
        throw Error(ErrorCode::InvalidInput, "fit_ar_yule_walker: need n > max_order + 1");
    }
    const Eigen::VectorXd c = autocovariance(x, max_order);
    require_nondegenerate(x, c[0]);
    const LevinsonDurbin ld = levinson_durbin(c, max_order);

    int best = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= max_order; ++k) {
        const double v = ld.innovation_variance[k];
        if (!(v > 0.0)) break;
        const double aic = static_cast<double>(n) * std::log(v) + 2.0 * k;
        if (aic < best_aic) {
            best_aic = aic;
            best = k;
        }
    }
    ARCoeffs ar;
    ar.eta = x.mean();
    ar.tau = ld.coefficients[best];
    ar.innovation_variance = ld.innovation_variance[best];
    return ar;
}

ARCoeffs fit_ar_yule_walker_order(const Eigen::Ref<const Eigen::VectorXd>& x, int order) {
    if (order < 0 || x.size() < order + 2) {
        throw Error(ErrorCode::InvalidInput, "fit_ar_yule_walker_order: need n > order + 1");
    }
    const Eigen::VectorXd c = autocovariance(x, order);
    require_nondegenerate(x, c[0]);
    const LevinsonDurbin ld = levinson_durbin(c, order);
    ARCoeffs ar;
    ar.eta = x.mean();
    ar.tau = ld.coefficients[order];
    ar.innovation_variance = ld.innovation_variance[order];
    return ar;
}

double ar_one_step(const ARCoeffs& ar, const Eigen::Ref<const Eigen::VectorXd>& history) {
    const int p = ar.order();
    if (history.size() < p) {
        throw Error(ErrorCode::HistoryTooShort, "ar_one_step: history shorter than AR order " +
                                                    std::to_string(p));
    }
    const Eigen::Index n = history.size();
    double value = ar.eta;
    for (int j = 1; j <= p; ++j) {
        value += ar.tau[j - 1] * (history[n - j] - ar.eta);
    }
    return value;
}

Eigen::VectorXd ar_multistep(const ARCoeffs& ar, const Eigen::Ref<const Eigen::VectorXd>& history, int steps) {
    const int p = ar.order();
    if (history.size() < p) {
        throw Error(ErrorCode::HistoryTooShort, "ar_multistep: history shorter than AR order " +
                                                    std::to_string(p));
    }
    if (steps < 1) {
        throw Error(ErrorCode::InvalidInput, "ar_multistep: steps must be >= 1");
    }
    // Rolling buffer: the last p observed values followed by the predictions.
    Eigen::VectorXd buffer(p + steps);
    buffer.head(p) = history.tail(p);
    for (int k = 0; k < steps; ++k) {
        buffer[p + k] = ar_one_step(ar, buffer.head(p + k));
    }
    return buffer.tail(steps);
}

bool is_stationary(const ARCoeffs& ar) {
    const int p = ar.order();
    if (p == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    companion.row(0) = ar.tau.transpose();
    if (p > 1) {
        companion.bottomLeftCorner(p - 1, p - 1).setIdentity();
    }
    const Eigen::VectorXcd roots = companion.eigenvalues();
    return roots.cwiseAbs().maxCoeff() < 1.0;
}

Eigen::VectorXd garch_filter(const GARCHCoeffs& g, const Eigen::Ref<const Eigen::VectorXd>& rho_sq,
                             double init_var) {
    if (g.omega0 < 0.0 || g.omega1 < 0.0 || g.omega2 < 0.0) {
        throw Error(ErrorCode::InvalidInput, "garch_filter: coefficients must be non-negative");
    }
    if (!(init_var > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "garch_filter: initial variance must be positive");
    }
    if ((rho_sq.array() < 0.0).any() || !rho_sq.allFinite()) {
        throw Error(ErrorCode::InvalidInput, "garch_filter: squared residuals must be finite and >= 0");
    }
    Eigen::VectorXd out(rho_sq.size());
    if (out.size() == 0) return out;
    out[0] = init_var;
    for (Eigen::Index t = 1; t < out.size(); ++t) {
        out[t] = g.omega0 + g.omega1 * out[t - 1] + g.omega2 * rho_sq[t - 1];
    }
    return out;
}

GARCHCoeffs fit_garch(const Eigen::Ref<const Eigen::VectorXd>& rho) {
    const Eigen::Index n = rho.size();
    if (n < 3) throw Error(ErrorCode::InvalidInput, "fit_garch: need at least 3 residuals");
    const Eigen::VectorXd rho_sq = rho.array().square().matrix();
    const double var = rho_sq.mean();
    const GARCHCoeffs fallback{var, 0.0, 0.0};
    if (!std::isfinite(var) || var < 1e-12) {
        log::warn("fit_garch: residual variance is degenerate, using a constant variance");
        return var > 0.0 && std::isfinite(var) ? fallback : GARCHCoeffs{};
    }

    // Parameters are square roots of the coefficients.
    auto nll = [&](const Eigen::VectorXd& q) {
        const GARCHCoeffs g{q[0] * q[0], q[1] * q[1], q[2] * q[2]};
        double v = g.initial_variance();
        double sum = 0.0;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (t > 0) v = g.omega0 + g.omega1 * v + g.omega2 * rho_sq[t - 1];
            if (!(v > 0.0) || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
            sum += std::log(v) + rho_sq[t] / v;
        }
        return 0.5 * sum / static_cast<double>(n);
    };

    Eigen::VectorXd q0(3);
    q0 << std::sqrt(0.1 * var), std::sqrt(0.8), std::sqrt(0.1);
    try {
        const OptResult r = minimize(nll, q0);
        const Eigen::VectorXd& q = r.coefficients;
        GARCHCoeffs g{q[0] * q[0], q[1] * q[1], q[2] * q[2]};
        if (std::isfinite(r.value) && g.is_stationary() && g.omega0 > 0.0) return g;
    } catch (const Error&) {
    }
    log::warn("fit_garch: optimization failed, using a constant variance");
    return fallback;
}

LjungBoxResult ljung_box(const Eigen::Ref<const Eigen::VectorXd>& x, int lag) {
    const Eigen::Index n = x.size();
    if (lag < 1 || lag >= n) {
        throw Error(ErrorCode::InvalidInput, "ljung_box: need n > lag >= 1");
    }
    const Eigen::VectorXd rho = acf(x, lag);
    const double nd = static_cast<double>(n);
    double sum = 0.0;
    for (int j = 1; j <= lag; ++j) {
        sum += rho[j - 1] * rho[j - 1] / (nd - j);
    }
    LjungBoxResult result;
    result.lag = lag;
    result.statistic = nd * (nd + 2.0) * sum;
    result.p_value = chi_squared_sf(result.statistic, lag);
    return result;
}

}  // namespace tsemos
