#pragma once

#include <array>
#include <vector>

#include "stablegof/quadrature.hpp"

namespace stablegof {

// Fourier transforms on t > 0 of g(t) = exp(-t^alpha - c t^gamma):
//   C0(y) = int cos(ty) g(t) dt
//   C1(y) = int t sin(ty) g(t) dt           (= -dC0/dy)
//   C2(y) = int cos(ty) t^alpha log(t) g(t) dt  (= -dC0/dalpha)
// With c = 0 this is pi times the symmetric stable density and its x and
// alpha derivatives (up to sign). With c > 0 it covers the damped integrals
// appearing in the test statistic and in the EISE objective.
//
// Small |y| use a fixed Gauss-Legendre panel grid shared by all y; large |y|
// use the small-t expansion of g (a double series in t^(k alpha + m gamma)).
// The switch point is the smallest |y| at which the series' own error
// estimate is below the target.
class DampedStableTransform {
public:
    struct SeriesResult {
        std::array<double, 3> value{};
        std::array<double, 3> rel_error{};  // estimated, per channel
        bool rows_limited = false;  // ran out of precomputed k rows
        bool cols_limited = false;  // some row ran out of precomputed m terms
    };

    // channels = 1 computes C0 only; 3 computes all three.
    DampedStableTransform(double alpha, double c = 0.0, double gamma = 1.0, int channels = 3);

    double alpha() const { return alpha_; }
    double crossover() const { return crossover_; }
    int channels() const { return nc_; }

    // Uses the grid below the crossover and the series above it. Falls back
    // to adaptive quadrature if the series error estimate is too large.
    std::array<double, 3> operator()(double y) const;

    std::array<double, 3> grid(double y) const;
    SeriesResult series(double y) const;
    // Adaptive Gauss-Kronrod on oscillation-sized panels; slow, used as reference.
    std::array<double, 3> reference(double y, const quad::Options& opt = {1e-11, 1e-16, 4000}) const;
    static std::array<double, 3> adaptive(double alpha, double c, double gamma, double y,
                                          const quad::Options& opt);

    double truncation() const { return T_; }
    std::size_t grid_size() const { return head_t_.size() + 10 * panels_; }

    // Series target: switch where the estimated relative error is below this.
    static constexpr double kSeriesTarget = 1e-13;

private:
    struct Term {
        double beta;      // k alpha + m gamma
        double logmag;    // log(Gamma(beta+1) c^m / (k! m!))
        double s, co;     // sin, cos(pi beta / 2)
        double psi;       // digamma(beta+1)
        int k, m;
        bool zero_sine;   // beta an even integer: term vanishes identically
    };

    double g_exponent(double t) const;
    void build_series_rows(int kmax, int mmax);
    void build_grid(double omega);
    bool series_ok(double y, int channel_mask) const;

    double alpha_, c_, gamma_;
    int nc_;
    double T_ = 0.0;
    double crossover_ = 0.0;

    std::vector<std::vector<Term>> rows_;

    // Grid: graded head nodes near t = 0, then uniform panels of width W.
    std::vector<double> head_t_;
    std::array<std::vector<double>, 3> head_v_;
    double head_eps_ = 0.0;
    double W_ = 0.0, a0_ = 0.0;
    std::size_t panels_ = 0;
    std::array<double, 10> d_{};
    std::array<std::vector<double>, 3> pan_v_;
};

}  // namespace stablegof
