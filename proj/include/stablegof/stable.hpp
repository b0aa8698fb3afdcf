#pragma once

#include <array>
#include <complex>

#include "stablegof/quadrature.hpp"
#include "stablegof/random.hpp"
#include "stablegof/transform.hpp"

namespace stablegof {

using cplx = std::complex<double>;

struct StableParams {
    double mu = 0.0;
    double sigma = 1.0;
    double alpha = 2.0;

    // Throws DomainError unless sigma > 0 and 0 < alpha <= 2.
    void validate() const;
};

enum class DensityMethod { inversion, tail_series };

struct DensityEval {
    double f = 0.0;
    double fprime = 0.0;  // d/dx
    double falpha = 0.0;  // d/dalpha
    DensityMethod method = DensityMethod::inversion;

    double fmu() const { return -fprime; }
    double fsigma(double x) const { return -f - x * fprime; }
};

cplx cf(double t, const StableParams& p);
// (dPhi/dmu, dPhi/dsigma, dPhi/dalpha); zero at t = 0.
std::array<cplx, 3> cf_grad(double t, const StableParams& p);

// Standard symmetric stable density f(x; alpha) and derivatives. Adaptive
// inversion below the tail-series crossover, the tail series above it.
DensityEval pdf(double x, double alpha);
DensityEval pdf_inversion(double x, double alpha, const quad::Options& opt = {1e-10, 1e-14, 4000});

struct SeriesEval {
    DensityEval value;
    double rel_error = 0.0;  // estimated, worst channel
};
SeriesEval pdf_series(double x, double alpha);

// Smallest |x| from which the tail series is used at this alpha.
double series_crossover(double alpha);

// Fast evaluator for many x at one alpha (precomputed quadrature grid and
// series coefficients). Values agree with pdf() to ~1e-12 relative.
class StableDensity {
public:
    explicit StableDensity(double alpha);

    double alpha() const { return alpha_; }
    double crossover() const { return tr_.crossover(); }
    DensityEval operator()(double x) const;

    struct LogEval {
        double logf;
        double dx;      // d log f / dx
        double dalpha;  // d log f / dalpha
    };
    LogEval log_eval(double x) const;

private:
    double alpha_;
    DampedStableTransform tr_;
};

// Standard symmetric stable variate (Chambers-Mallows-Stuck).
double rand_stable(double alpha, UniformSource& u);

}  // namespace stablegof
