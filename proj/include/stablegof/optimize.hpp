#pragma once

#include <functional>

#include <Eigen/Dense>

namespace stablegof {

struct MinimizeOptions {
    double gtol = 1e-8;       // on the projected gradient, infinity norm
    int max_iter = 300;
    // Accept a stalled line search as converged when the projected gradient
    // is already below this (gradient noise floor of the objective).
    double stall_gtol = 1e-6;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    double projected_gradient = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

// Objective returns f(x) and fills grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Quasi-Newton (BFGS) minimization over the box lower <= x <= upper with
// gradient projection and Armijo backtracking. Bounds may be +-infinity.
MinimizeResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const MinimizeOptions& opt = {});

}  // namespace stablegof
