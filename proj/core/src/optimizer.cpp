#include "copmarkov/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "copmarkov/error.hpp"

namespace copmarkov {
namespace {

constexpr double kArmijo = 1.0e-4;
constexpr int kMaxBacktracks = 60;

double scaled_norm(const Eigen::VectorXd& g, double f) {
    if (g.size() == 0) return 0.0;
    return g.lpNorm<Eigen::Infinity>() / std::max(1.0, std::abs(f));
}

double stencil_value(const ObjectiveFn& f, const Eigen::VectorXd& x, Eigen::Index i) {
    const double v = f(x);
    if (!std::isfinite(v))
        throw NumericalFailure("non-finite objective in difference stencil for coordinate " +
                               std::to_string(i));
    return v;
}

}  // namespace

void validate(const OptimizerSettings& settings) {
    if (!(settings.gradient_tolerance > 0.0)) throw DomainError("gradient tolerance must be positive");
    if (settings.max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(settings.step_scale > 0.0)) throw DomainError("step scale must be positive");
}

const char* status_name(OptimizerStatus status) {
    switch (status) {
        case OptimizerStatus::Converged:
            return "converged";
        case OptimizerStatus::MaxIterations:
            return "max_iterations";
        case OptimizerStatus::LineSearchFailed:
            return "line_search_failed";
        case OptimizerStatus::NonFinite:
            return "non_finite";
    }
    return "unknown";
}

double difference_step(double xi) {
    // Rounded so that x + h and x - h are representable exactly.
    const double h = 1.0e-5 * std::max(1.0, std::abs(xi));
    const volatile double up = xi + h;
    return up - xi;
}

Eigen::VectorXd num_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = difference_step(x[i]);
        probe[i] = x[i] + h;
        const double up = stencil_value(f, probe, i);
        probe[i] = x[i] - h;
        const double down = stencil_value(f, probe, i);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

Eigen::MatrixXd num_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h(n, n);
    Eigen::VectorXd step(n);
    for (Eigen::Index i = 0; i < n; ++i) step[i] = difference_step(x[i]);
    const double centre = stencil_value(f, x, 0);
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        probe[i] = x[i] + step[i];
        const double up = stencil_value(f, probe, i);
        probe[i] = x[i] - step[i];
        const double down = stencil_value(f, probe, i);
        probe[i] = x[i];
        h(i, i) = (up - 2.0 * centre + down) / (step[i] * step[i]);
        for (Eigen::Index j = 0; j < i; ++j) {
            double corner[4];
            const double si[4] = {1.0, 1.0, -1.0, -1.0};
            const double sj[4] = {1.0, -1.0, 1.0, -1.0};
            for (int k = 0; k < 4; ++k) {
                probe[i] = x[i] + si[k] * step[i];
                probe[j] = x[j] + sj[k] * step[j];
                corner[k] = stencil_value(f, probe, i);
            }
            probe[i] = x[i];
            probe[j] = x[j];
            h(i, j) = (corner[0] - corner[1] - corner[2] + corner[3]) / (4.0 * step[i] * step[j]);
            h(j, i) = h(i, j);
        }
    }
    return 0.5 * (h + h.transpose());
}

MinimizeResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const OptimizerSettings& settings, const GradientFn& gradient) {
    validate(settings);
    const Eigen::Index n = x0.size();
    MinimizeResult result;
    result.x = x0;

    auto safe_value = [&](const Eigen::VectorXd& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    auto grad_at = [&](const Eigen::VectorXd& x) {
        return gradient ? gradient(x) : num_gradient(f, x);
    };

    result.value = safe_value(result.x);
    if (!std::isfinite(result.value)) {
        result.status = OptimizerStatus::NonFinite;
        return result;
    }
    if (n == 0) return result;

    Eigen::VectorXd g;
    try {
        g = grad_at(result.x);
    } catch (const NumericalFailure&) {
        result.status = OptimizerStatus::NonFinite;
        return result;
    }
    result.grad_norm = scaled_norm(g, result.value);

    auto initial_inverse = [&](const Eigen::VectorXd& grad) {
        const double gmax = std::max(grad.lpNorm<Eigen::Infinity>(), 1.0e-12);
        return Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n) * (settings.step_scale / gmax));
    };
    Eigen::MatrixXd inverse = initial_inverse(g);
    bool fresh = true;

    while (true) {
        if (result.grad_norm < settings.gradient_tolerance) {
            result.status = OptimizerStatus::Converged;
            return result;
        }
        if (result.iterations >= settings.max_iterations) {
            result.status = OptimizerStatus::MaxIterations;
            return result;
        }

        Eigen::VectorXd direction = -inverse * g;
        double slope = g.dot(direction);
        if (!(slope < 0.0)) {
            inverse = initial_inverse(g);
            fresh = true;
            direction = -inverse * g;
            slope = g.dot(direction);
        }

        double alpha = 1.0;
        double trial_value = std::numeric_limits<double>::infinity();
        Eigen::VectorXd trial;
        bool accepted = false;
        for (int k = 0; k < kMaxBacktracks; ++k) {
            trial = result.x + alpha * direction;
            if (trial == result.x) break;
            trial_value = safe_value(trial);
            if (trial_value <= result.value + kArmijo * alpha * slope) {
                accepted = true;
                break;
            }
            if (std::isfinite(trial_value)) {
                // Minimiser of the quadratic through f(0), f'(0) and f(alpha).
                const double denom = 2.0 * (trial_value - result.value - slope * alpha);
                double next = denom > 0.0 ? -slope * alpha * alpha / denom : 0.5 * alpha;
                alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
            } else {
                alpha *= 0.2;
            }
        }

        if (!accepted) {
            if (!fresh) {
                inverse = initial_inverse(g);
                fresh = true;
                continue;
            }
            result.status = OptimizerStatus::LineSearchFailed;
            return result;
        }

        Eigen::VectorXd g_new;
        try {
            g_new = grad_at(trial);
        } catch (const NumericalFailure&) {
            result.x = trial;
            result.value = trial_value;
            result.status = OptimizerStatus::NonFinite;
            return result;
        }
        const Eigen::VectorXd s = trial - result.x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1.0e-12 * s.norm() * y.norm()) {
            if (fresh) inverse = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = inverse * y;
            inverse += rho * rho * (sy + y.dot(hy)) * s * s.transpose() -
                       rho * (hy * s.transpose() + s * hy.transpose());
            fresh = false;
        }
        result.x = trial;
        result.value = trial_value;
        g = g_new;
        result.grad_norm = scaled_norm(g, result.value);
        ++result.iterations;
    }
}

}  // namespace copmarkov
