#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stablegof/kernels.hpp"

namespace stablegof {

struct Discretization {
    Eigen::MatrixXd K;          // K(xi_i, xi_j)
    std::vector<double> grid;   // midpoint nodes xi_i = -1 + (2i - 1)/N
};

// Operator eigenvalues of the kernel on [-1,1], stored as their reciprocals
// lambda_1 <= lambda_2 <= ... (the Fredholm eigenvalues).
struct Spectrum {
    std::vector<double> lambdas;
    int N = 0;
    std::vector<double> grid;
    KernelSpec kernel;
    int discarded = 0;          // non-positive or below-cutoff matrix eigenvalues
    double matrix_trace = 0.0;  // trace of (2/N) K

    // sum_j 1/lambda_j = E[D] under the discretized law.
    double mean() const;
};

Discretization discretize(const Kernel& k, int N);
Spectrum eigen_spectrum(const Discretization& d, const KernelSpec& spec);
Spectrum compute_spectrum(const KernelSpec& spec, int N);

// prod_{j <= m} (1 - lambda / lambda_j)
double fredholm_det(double lambda, const Spectrum& s, int m);

// int_{-1}^{1} K(u,u) du by adaptive quadrature (= int Gamma(t,t) e^{-kappa|t|} dt).
double kernel_trace(const Kernel& k);

// Flat text serialization. Matrix fields of the kernel spec are not stored.
void save_spectrum(const Spectrum& s, const std::string& path);
Spectrum load_spectrum(const std::string& path);
std::string spectrum_cache_name(const KernelSpec& spec, int N);

}  // namespace stablegof
