#include "tsemos/optimize.hpp"
#include "tsemos/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace tsemos {

std::string_view to_string(OptStatus status) noexcept {
    switch (status) {
    case OptStatus::GradientConverged: return "gradient";
    case OptStatus::StepConverged: return "step";
    case OptStatus::MaxIterations: return "max_iterations";
    case OptStatus::LineSearchFailed: return "line_search";
    case OptStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps) {
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = steps[i];
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw Error(ErrorCode::NumericalFailure,
                        "numeric_gradient: non-finite objective along component " + std::to_string(i));
        }
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
    return numeric_gradient(f, x, Eigen::VectorXd::Constant(x.size(), h));
}

namespace {

struct Point {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd g;

    [[nodiscard]] bool finite() const { return std::isfinite(f) && g.allFinite(); }
};

class Evaluator {
public:
    Evaluator(const Objective& f, const ObjectiveWithGradient& fg, const OptimizeSettings& s)
        : f_(f), fg_(fg), settings_(s) {}

    Point operator()(const Eigen::VectorXd& x) {
        Point p{x, 0.0, Eigen::VectorXd::Zero(x.size())};
        ++evaluations;
        if (fg_) {
            p.f = fg_(x, p.g);
            return p;
        }
        p.f = f_(x);
        if (!std::isfinite(p.f)) {
            return p;
        }
        const Eigen::VectorXd steps = settings_.fd_step * (1.0 + x.array().abs()).matrix();
        try {
            p.g = numeric_gradient(f_, x, steps);
        } catch (const Error&) {
            p.g.setConstant(std::numeric_limits<double>::quiet_NaN());
        }
        evaluations += 2 * static_cast<int>(x.size());
        return p;
    }

    int evaluations = 0;

private:
    const Objective& f_;
    const ObjectiveWithGradient& fg_;
    const OptimizeSettings& settings_;
};

// Strong Wolfe line search (bracketing phase followed by zoom).
class LineSearch {
public:
    LineSearch(Evaluator& eval, const OptimizeSettings& s, const Point& start, const Eigen::VectorXd& dir)
        : eval_(eval), s_(s), start_(start), dir_(dir), slope0_(start.g.dot(dir)) {}

    std::optional<Point> run(double alpha) {
        double prev_alpha = 0.0;
        Point prev = start_;
        double prev_slope = slope0_;
        for (budget_ = s_.max_line_search; budget_ > 0; --budget_) {
            Point p = eval_(start_.x + alpha * dir_);
            if (!p.finite()) {
                alpha = prev_alpha + 0.25 * (alpha - prev_alpha);
                continue;
            }
            const double slope = p.g.dot(dir_);
            if (p.f > start_.f + s_.armijo * alpha * slope0_ || (prev_alpha > 0.0 && p.f >= prev.f)) {
                return zoom(prev_alpha, prev, prev_slope, alpha, p.f);
            }
            if (std::abs(slope) <= -s_.curvature * slope0_) {
                return p;
            }
            if (slope >= 0.0) {
                return zoom(alpha, p, slope, prev_alpha, prev.f);
            }
            prev_alpha = alpha;
            prev = std::move(p);
            prev_slope = slope;
            alpha *= 2.0;
        }
        return accept_if_decreasing(prev_alpha, prev);
    }

private:
    std::optional<Point> zoom(double lo, Point lo_point, double lo_slope, double hi, double hi_f) {
        while (--budget_ > 0) {
            // Safeguarded quadratic interpolation between lo and hi.
            const double width = hi - lo;
            double t = 0.5;
            if (std::isfinite(hi_f)) {
                const double denom = 2.0 * (hi_f - lo_point.f - lo_slope * width);
                if (denom > 0.0) {
                    t = -lo_slope * width / denom;
                }
            }
            t = std::clamp(t, 0.1, 0.9);
            const double alpha = lo + t * width;
            Point p = eval_(start_.x + alpha * dir_);
            if (!p.finite()) {
                hi = alpha;
                hi_f = std::numeric_limits<double>::infinity();
                continue;
            }
            const double slope = p.g.dot(dir_);
            if (p.f > start_.f + s_.armijo * alpha * slope0_ || p.f >= lo_point.f) {
                hi = alpha;
                hi_f = p.f;
                continue;
            }
            if (std::abs(slope) <= -s_.curvature * slope0_) {
                return p;
            }
            if (slope * (hi - lo) >= 0.0) {
                hi = lo;
                hi_f = lo_point.f;
            }
            lo = alpha;
            lo_point = std::move(p);
            lo_slope = slope;
        }
        return accept_if_decreasing(lo, lo_point);
    }

    // Out of budget: settle for sufficient decrease without the curvature condition.
    std::optional<Point> accept_if_decreasing(double alpha, Point p) const {
        if (alpha > 0.0 && p.f <= start_.f + s_.armijo * alpha * slope0_ && p.f < start_.f) {
            return p;
        }
        return std::nullopt;
    }

    Evaluator& eval_;
    const OptimizeSettings& s_;
    const Point& start_;
    const Eigen::VectorXd& dir_;
    double slope0_;
    int budget_ = 0;
};

}  // namespace

OptResult minimize(const Objective& objective, const Eigen::VectorXd& init, const OptimizeSettings& settings,
                   const ObjectiveWithGradient& gradient) {
    if (settings.max_iterations < 1 || !(settings.gradient_tolerance > 0.0) || !(settings.step_tolerance > 0.0) ||
        !(settings.fd_step > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "minimize: invalid optimizer settings");
    }
    Evaluator eval(objective, gradient, settings);
    Point current = eval(init);
    if (!std::isfinite(current.f)) {
        throw Error(ErrorCode::InvalidStart, "minimize: objective is not finite at the initial point");
    }

    OptResult result;
    const Eigen::Index n = init.size();
    auto finish = [&](OptStatus status) {
        result.coefficients = current.x;
        result.value = current.f;
        result.gradient_norm = current.g.allFinite() ? current.g.norm() : std::numeric_limits<double>::infinity();
        result.evaluations = eval.evaluations;
        result.status = status;
        result.converged = status == OptStatus::GradientConverged || status == OptStatus::StepConverged;
        return result;
    };
    if (!current.g.allFinite()) {
        return finish(OptStatus::NumericalFailure);
    }

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    bool fresh = true;
    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        const double gnorm = current.g.norm();
        if (gnorm <= settings.gradient_tolerance) {
            return finish(OptStatus::GradientConverged);
        }
        Eigen::VectorXd dir = -inv_hessian * current.g;
        if (current.g.dot(dir) >= 0.0) {
            inv_hessian.setIdentity();
            fresh = true;
            dir = -current.g;
        }
        const double alpha0 = fresh ? std::min(1.0, 1.0 / gnorm) : 1.0;
        std::optional<Point> next = LineSearch(eval, settings, current, dir).run(alpha0);
        if (!next) {
            if (!fresh) {
                // Retry along steepest descent before giving up.
                inv_hessian.setIdentity();
                fresh = true;
                --iter;
                continue;
            }
            return finish(OptStatus::LineSearchFailed);
        }
        const Eigen::VectorXd step = next->x - current.x;
        const Eigen::VectorXd dgrad = next->g - current.g;
        current = std::move(*next);
        result.iterations = iter + 1;

        if (step.lpNorm<Eigen::Infinity>() <= settings.step_tolerance * (1.0 + current.x.lpNorm<Eigen::Infinity>())) {
            return finish(OptStatus::StepConverged);
        }
        const double sy = step.dot(dgrad);
        if (sy > 1e-12 * step.norm() * dgrad.norm()) {
            if (fresh) {
                inv_hessian *= sy / dgrad.squaredNorm();
                fresh = false;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = inv_hessian * dgrad;
            inv_hessian += rho * ((1.0 + rho * dgrad.dot(hy)) * step * step.transpose() -
                                  (hy * step.transpose() + step * hy.transpose()));
        }
    }
    return finish(OptStatus::MaxIterations);
}

}  // namespace tsemos
