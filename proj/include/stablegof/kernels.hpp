#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "stablegof/estimators.hpp"

namespace stablegof {

enum class KernelKind { mle_h1, mle_h2, cauchy_mle, eise_h1, eise_fixed, efficient_general };

const char* kernel_kind_name(KernelKind k);
KernelKind parse_kernel_kind(const std::string& name);

struct KernelSpec {
    KernelKind kind = KernelKind::mle_h1;
    double alpha = 1.5;
    double kappa = 1.0;
    WeightSpec weight;                                            // EISE kinds
    Eigen::Matrix3d fisher_inverse = Eigen::Matrix3d::Zero();     // MLE kinds
    EiseMatrices eise;                                            // EISE kinds

    // Factories fill the matrix fields.
    static KernelSpec mle_h1(double alpha, double kappa);
    static KernelSpec mle_h2(double alpha, double kappa);  // alpha = 2 gives the normal location-scale kernel
    static KernelSpec cauchy(double kappa);
    static KernelSpec eise_h1(double alpha, double kappa, const WeightSpec& w);
    static KernelSpec eise_fixed(double alpha, double kappa, const WeightSpec& w);

    void validate() const;
};

// Covariance functions of the limiting ECF process at (0, 1, alpha).
// fisher_inverse is the inverse information for (mu, sigma, alpha).
double gamma_mle(double s, double t, double alpha, const Eigen::Matrix3d& fisher_inverse);
// Fixed alpha: only the (mu, sigma) block of fisher_inverse is used.
double gamma_mle_fixed(double s, double t, double alpha, const Eigen::Matrix3d& fisher_inverse);
// Closed form for alpha = 1 with all three parameters estimated.
double gamma_cauchy(double s, double t);

// A characteristic function family and its parameter gradient at theta0.
struct CfModel {
    std::function<cplx(double)> cf;
    std::function<Eigen::VectorXcd(double)> gradient;
};
CfModel stable_cf_model(const StableParams& theta0);
cplx gamma_efficient(double s, double t, const CfModel& model, const Eigen::MatrixXd& fisher_inverse);

// EISE covariance. The inner integrals int e^{-|s-u|^a - |u|^a} {u, |u|^a, |u|^a log|u|} w(u) du
// are tabulated once in s and interpolated.
class EiseKernel {
public:
    EiseKernel(double alpha, const EiseMatrices& m, bool fixed_alpha, double s_max);
    double operator()(double s, double t) const;
    // Direct quadrature of the inner integrals at s (reference path).
    std::array<double, 3> inner(double s) const;
    std::array<double, 3> inner_interpolated(double s) const;

private:
    struct Tables;
    double alpha_;
    Eigen::Matrix3d Ainv_, J_;
    double Bs_, Ba_;
    WeightSpec w_;
    double s_max_;
    std::shared_ptr<const Tables> tab_;
};

// Gamma(s, t) for any spec; EISE kinds build (and cache per object) their tables.
class Kernel {
public:
    explicit Kernel(const KernelSpec& spec);
    const KernelSpec& spec() const { return spec_; }
    double gamma(double s, double t) const;
    // Kernel on [-1,1]^2 after s = -sgn(u) log(1-|u|), including the weight e^{-kappa|s|}.
    double transformed(double u, double v) const;

private:
    KernelSpec spec_;
    std::shared_ptr<const EiseKernel> eise_;
};

double transformed_kernel(double u, double v, const Kernel& k);

}  // namespace stablegof
