#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "stablegof/error.hpp"
#include "stablegof/stable.hpp"

namespace stablegof {

struct WeightSpec {
    enum class Kind { exp_abs, exp_power };
    Kind kind = Kind::exp_abs;
    double kappa_or_nu = 1.0;
    double bar_alpha = 1.0;  // exponent for exp_power; exp_abs behaves as 1

    static WeightSpec exp_abs(double kappa) { return {Kind::exp_abs, kappa, 1.0}; }
    static WeightSpec exp_power(double nu, double bar_alpha) { return {Kind::exp_power, nu, bar_alpha}; }

    void validate() const;
    double exponent() const { return kind == Kind::exp_abs ? 1.0 : bar_alpha; }
    double operator()(double t) const;
    // d/dt w(t) for t > 0.
    double derivative(double t) const;
    // Fourier transform int cos(td) w(t) dt over the real line, and its d/dd.
    double transform(double d) const;
    double transform_derivative(double d) const;
};

struct FisherInfo {
    double I11 = 0, I22 = 0, I23 = 0, I33 = 0;
    double alpha = 0;

    Eigen::Matrix3d matrix() const;
    Eigen::Matrix3d inverse() const;
};

// Full (mu, sigma, alpha) information for 0 < alpha < 2.
FisherInfo fisher_info(double alpha);
// Closed forms at alpha = 1.
FisherInfo cauchy_fisher_info();
// Location-scale block at alpha = 2 (normal with variance 2); I33 is not
// finite there and is left at zero.
FisherInfo gaussian_location_scale_info();

// MLE score functions at the standard case: (h_mu, h_sigma, h_alpha).
std::array<double, 3> mle_scores(double x, const StableDensity& sd);
// Closed-form Cauchy scores.
std::array<double, 3> cauchy_al(double x);

struct FitOptions {
    std::optional<double> fixed_alpha;  // H2: only (mu, sigma) are fitted
    double alpha_min = 0.4;
    double gtol = 1e-8;
    int max_iter = 300;
};

struct FitReport {
    StableParams params;
    double objective = 0.0;  // mean negative log-likelihood, or Q
    double projected_gradient = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    bool alpha_at_boundary = false;  // alpha pinned at 2
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& msg, FitReport best) : NumericalError(msg), best_(best) {}
    const FitReport& best() const { return best_; }

private:
    FitReport best_;
};

FitReport mle_fit(const std::vector<double>& data, const FitOptions& opt = {});

// Mean log-likelihood (1/n) sum log f((x-mu)/sigma; alpha) - log sigma and its gradient.
double mle_loglik(const std::vector<double>& data, const StableParams& p, std::array<double, 3>* grad = nullptr);

struct EiseMatrices {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    double Bsigma = 0.0;
    double Balpha = 0.0;
    double alpha = 0.0;
    WeightSpec weight;
};

EiseMatrices eise_matrices(double alpha, const WeightSpec& w);

// EISE influence functions h_theta(x) (before multiplying by A^{-1}).
std::array<double, 3> eise_scores(double x, double alpha, const WeightSpec& w);

// Q(mu, sigma, alpha) by the cosine-sum expansion, with analytic gradient.
double eise_objective(const std::vector<double>& data, const StableParams& p, const WeightSpec& w,
                      std::array<double, 3>* grad = nullptr);
// Q by direct quadrature of |Phi_n - Phi|^2 w (reference path).
double eise_objective_direct(const std::vector<double>& data, const StableParams& p, const WeightSpec& w);

FitReport eise_fit(const std::vector<double>& data, const WeightSpec& w, const FitOptions& opt = {});

// Robust location/scale used to standardize data before fitting.
struct Standardization {
    double center;
    double scale;
};
Standardization robust_standardization(const std::vector<double>& data);

}  // namespace stablegof
