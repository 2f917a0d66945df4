#include "tsemos/objectives.hpp"

#include "tsemos/distributions.hpp"
#include "tsemos/error.hpp"
#include "tsemos/seasonal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tsemos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrtPi = 1.0 / std::sqrt(std::numbers::pi);

struct CrpsTerms {
    double value;
    double d_mu;
    double d_sigma;
};

inline CrpsTerms crps_terms(double mu, double sigma, double y) {
    const double z = (y - mu) / sigma;
    const double cdf = normal_cdf(z);
    const double pdf = normal_pdf(z);
    return {sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - kInvSqrtPi), 1.0 - 2.0 * cdf, 2.0 * pdf - kInvSqrtPi};
}

}  // namespace

SeasonalDesign make_seasonal_design(const StationSeries& series, Date origin) {
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = time_index(origin, series.dates[static_cast<std::size_t>(i)]);
    return {seasonal_design(t, series.ens_mean), seasonal_design(t, series.ens_sd), series.obs};
}

Eigen::VectorXd pack_parameters(const ParameterLayout& layout, const FittedModel& model) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(layout.size());
    theta.segment(0, 10) = model.loc;
    theta.segment(10, 10) = model.scale;
    if (has_ar(layout.kind)) {
        if (!model.ar || model.ar->order() != layout.ar_order) {
            throw Error(ErrorCode::InvalidInput, "AR order does not match the parameter layout");
        }
        theta[layout.ar_offset()] = model.ar->eta;
        theta.segment(layout.ar_offset() + 1, layout.ar_order) = model.ar->tau;
    }
    if (layout.kind == ModelKind::DarGarchSemos) {
        if (!model.garch) throw Error(ErrorCode::InvalidInput, "missing GARCH coefficients");
        const Eigen::Index g = layout.garch_offset();
        theta[g] = std::sqrt(model.garch->omega0);
        theta[g + 1] = std::sqrt(model.garch->omega1);
        theta[g + 2] = std::sqrt(model.garch->omega2);
    }
    return theta;
}

void unpack_parameters(const ParameterLayout& layout, const Eigen::VectorXd& theta, FittedModel& model) {
    model.kind = layout.kind;
    model.loc = theta.segment(0, 10);
    model.scale = theta.segment(10, 10);
    if (has_ar(layout.kind)) {
        ARCoeffs ar;
        ar.eta = theta[layout.ar_offset()];
        ar.tau = theta.segment(layout.ar_offset() + 1, layout.ar_order);
        model.ar = ar;
    } else {
        model.ar.reset();
    }
    if (layout.kind == ModelKind::DarGarchSemos) {
        const Eigen::Index g = layout.garch_offset();
        model.garch = GARCHCoeffs{theta[g] * theta[g], theta[g + 1] * theta[g + 1], theta[g + 2] * theta[g + 2]};
    } else {
        model.garch.reset();
    }
}

SeasonalObjective::SeasonalObjective(ParameterLayout layout, SeasonalDesign design)
    : layout_(layout), design_(std::move(design)) {
    if (!is_seasonal(layout_.kind)) throw Error(ErrorCode::InvalidInput, "not a seasonal model");
    if (!has_ar(layout_.kind)) layout_.ar_order = 0;
    if (design_.size() <= layout_.ar_order) {
        throw Error(ErrorCode::InsufficientHistory, "training series shorter than the AR order");
    }
}

double SeasonalObjective::operator()(const Eigen::VectorXd& theta) const {
    return evaluate(theta, nullptr, nullptr);
}

double SeasonalObjective::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    grad.setZero(layout_.size());
    return evaluate(theta, &grad, nullptr);
}

std::vector<GaussianParams> SeasonalObjective::fitted(const Eigen::VectorXd& theta) const {
    std::vector<GaussianParams> out;
    out.reserve(static_cast<std::size_t>(design_.size() - first_case()));
    evaluate(theta, nullptr, &out);
    return out;
}

double SeasonalObjective::evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd* grad,
                                   std::vector<GaussianParams>* out) const {
    const Eigen::Index P = layout_.size();
    if (theta.size() != P) throw Error(ErrorCode::InvalidInput, "parameter vector has the wrong length");
    const Eigen::Index n = design_.size();
    const int p = layout_.ar_order;
    const ModelKind kind = layout_.kind;
    const auto& L = design_.location;
    const auto& S = design_.scale;
    const auto& y = design_.obs;

    const Eigen::VectorXd muS = L * theta.segment(0, 10);
    const Eigen::VectorXd sigS = (S * theta.segment(10, 10)).array().exp().matrix();
    if (!muS.allFinite() || !sigS.allFinite() || sigS.minCoeff() <= 0.0) return kInf;

    double eta = 0.0;
    Eigen::VectorXd tau;
    if (has_ar(kind)) {
        eta = theta[layout_.ar_offset()];
        tau = theta.segment(layout_.ar_offset() + 1, p);
    }
    const double tau_sum = tau.sum();

    // AR input series: residuals for DAR models, standardized anomalies for SAR.
    Eigen::VectorXd u;
    if (kind == ModelKind::SarSemos) {
        u = ((y - muS).array() / sigS.array()).matrix();
    } else if (has_ar(kind)) {
        u = y - muS;
    }

    GARCHCoeffs garch;
    Eigen::Index g = 0;
    if (kind == ModelKind::DarGarchSemos) {
        g = layout_.garch_offset();
        garch = {theta[g] * theta[g], theta[g + 1] * theta[g + 1], theta[g + 2] * theta[g + 2]};
    }

    const bool need_grad = grad != nullptr;
    Eigen::VectorXd dmu, dsig, dv, drho_prev;
    if (need_grad) {
        dmu.resize(P);
        dsig.resize(P);
        dv = Eigen::VectorXd::Zero(P);
        drho_prev = Eigen::VectorXd::Zero(P);
    }

    double v = 0.0;
    double rho_prev = 0.0;
    if (kind == ModelKind::DarGarchSemos) {
        v = garch.initial_variance();
        if (need_grad && garch.is_stationary()) {
            const double d = 1.0 - garch.omega1 - garch.omega2;
            dv[g] = 2.0 * theta[g] / d;
            dv[g + 1] = garch.omega0 * 2.0 * theta[g + 1] / (d * d);
            dv[g + 2] = garch.omega0 * 2.0 * theta[g + 2] / (d * d);
        }
    }

    double total = 0.0;
    for (Eigen::Index t = p; t < n; ++t) {
        double pred = 0.0;
        if (has_ar(kind)) {
            pred = eta;
            for (int j = 1; j <= p; ++j) pred += tau[j - 1] * (u[t - j] - eta);
        }

        double mu = muS[t];
        double sigma = sigS[t];
        if (need_grad) {
            dmu.setZero();
            dsig.setZero();
            dmu.segment(0, 10) = L.row(t).transpose();
            dsig.segment(10, 10) = sigS[t] * S.row(t).transpose();
        }

        if (kind == ModelKind::DarSemos || kind == ModelKind::DarGarchSemos) {
            mu += pred;
            if (need_grad) {
                for (int j = 1; j <= p; ++j) {
                    dmu.segment(0, 10) -= tau[j - 1] * L.row(t - j).transpose();
                    dmu[layout_.ar_offset() + j] = u[t - j] - eta;
                }
                dmu[layout_.ar_offset()] = 1.0 - tau_sum;
            }
        } else if (kind == ModelKind::SarSemos) {
            mu += sigS[t] * pred;
            if (need_grad) {
                dmu.segment(10, 10) += sigS[t] * pred * S.row(t).transpose();
                for (int j = 1; j <= p; ++j) {
                    dmu.segment(0, 10) -= sigS[t] * tau[j - 1] / sigS[t - j] * L.row(t - j).transpose();
                    dmu.segment(10, 10) -= sigS[t] * tau[j - 1] * u[t - j] * S.row(t - j).transpose();
                    dmu[layout_.ar_offset() + j] = sigS[t] * (u[t - j] - eta);
                }
                dmu[layout_.ar_offset()] = sigS[t] * (1.0 - tau_sum);
            }
        }

        if (kind == ModelKind::DarGarchSemos) {
            if (t > p) {
                if (need_grad) {
                    dv = garch.omega1 * dv + garch.omega2 * 2.0 * rho_prev * drho_prev;
                    dv[g] += 2.0 * theta[g];
                    dv[g + 1] += 2.0 * theta[g + 1] * v;
                    dv[g + 2] += 2.0 * theta[g + 2] * rho_prev * rho_prev;
                }
                v = garch.omega0 + garch.omega1 * v + garch.omega2 * rho_prev * rho_prev;
            }
            if (!(v > 0.0) || !std::isfinite(v)) return kInf;
            const double sd = std::sqrt(v);
            sigma = sigS[t] * sd;
            if (need_grad) {
                dsig *= sd;
                dsig += sigS[t] / (2.0 * sd) * dv;
            }
            rho_prev = (y[t] - mu) / sigS[t];
            if (need_grad) {
                drho_prev = -dmu / sigS[t];
                drho_prev.segment(10, 10) -= rho_prev * S.row(t).transpose();
            }
        }

        if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) return kInf;
        if (out) out->push_back({mu, sigma});
        const CrpsTerms c = crps_terms(mu, sigma, y[t]);
        total += c.value;
        if (need_grad) *grad += c.d_mu * dmu + c.d_sigma * dsig;
    }

    const double cases = static_cast<double>(n - p);
    if (need_grad) *grad /= cases;
    return total / cases;
}

EmosObjective::EmosObjective(Eigen::VectorXd ens_mean, Eigen::VectorXd ens_sd, Eigen::VectorXd obs, double ridge)
    : xbar_(std::move(ens_mean)), log_s_(ens_sd.array().log().matrix()), y_(std::move(obs)), ridge_(ridge) {
    if (xbar_.size() == 0 || xbar_.size() != log_s_.size() || xbar_.size() != y_.size()) {
        throw Error(ErrorCode::InvalidInput, "EMOS window inputs must be non-empty and of equal length");
    }
    if ((ens_sd.array() <= 0.0).any()) throw Error(ErrorCode::InvalidInput, "EMOS needs a positive ensemble spread");
}

double EmosObjective::operator()(const Eigen::VectorXd& theta) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const double mu = theta[0] + theta[1] * xbar_[i];
        const double sigma = std::exp(theta[2] + theta[3] * log_s_[i]);
        if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) return kInf;
        total += crps_terms(mu, sigma, y_[i]).value;
    }
    return total / static_cast<double>(y_.size()) + ridge_ * theta.squaredNorm();
}

double EmosObjective::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
    grad.setZero(4);
    double total = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const double mu = theta[0] + theta[1] * xbar_[i];
        const double sigma = std::exp(theta[2] + theta[3] * log_s_[i]);
        if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) return kInf;
        const CrpsTerms c = crps_terms(mu, sigma, y_[i]);
        total += c.value;
        grad[0] += c.d_mu;
        grad[1] += c.d_mu * xbar_[i];
        grad[2] += c.d_sigma * sigma;
        grad[3] += c.d_sigma * sigma * log_s_[i];
    }
    const double n = static_cast<double>(y_.size());
    grad /= n;
    grad += 2.0 * ridge_ * theta;
    return total / n + ridge_ * theta.squaredNorm();
}

}  // namespace tsemos
