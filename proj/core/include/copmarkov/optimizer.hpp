#pragma once

#include <functional>
#include <string>

#include <Eigen/Core>

namespace copmarkov {

struct OptimizerSettings {
    /// Stop when ||grad||_inf / max(1, |f|) falls below this.
    double gradient_tolerance = 1.0e-5;
    int max_iterations = 500;
    /// Length (infinity norm) of the first trial step.
    double step_scale = 1.0;
};

void validate(const OptimizerSettings& settings);

enum class OptimizerStatus { Converged, MaxIterations, LineSearchFailed, NonFinite };

const char* status_name(OptimizerStatus status);

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    /// Scaled gradient infinity norm at x.
    double grad_norm = 0.0;
    int iterations = 0;
    int evaluations = 0;
    OptimizerStatus status = OptimizerStatus::Converged;

    bool converged() const { return status == OptimizerStatus::Converged; }
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference step used for coordinate i.
double difference_step(double xi);

/// Central differences with h_i = 1e-5 max(1, |x_i|). Throws NumericalFailure
/// naming the coordinate when a stencil value is not finite.
Eigen::VectorXd num_gradient(const ObjectiveFn& f, const Eigen::VectorXd& x);
/// Central second differences, symmetrised.
Eigen::MatrixXd num_hessian(const ObjectiveFn& f, const Eigen::VectorXd& x);

/// BFGS quasi-Newton minimisation with a backtracking Armijo line search.
/// `gradient` defaults to num_gradient of `f`. Objective values that are not
/// finite shrink the step; they never abort the line search.
MinimizeResult minimize(const ObjectiveFn& f, const Eigen::VectorXd& x0,
                        const OptimizerSettings& settings = {}, const GradientFn& gradient = {});

}  // namespace copmarkov
