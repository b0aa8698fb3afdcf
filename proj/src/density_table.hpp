#pragma once

// Cubic Hermite table of log f(x; alpha) in u = asinh(x). Used where many
// density evaluations at one alpha are needed and ~1e-9 relative accuracy is
// enough (grid searches, the EISE pair sum). Beyond the last node the exact
// evaluator is used.

#include <cmath>
#include <vector>

#include "stablegof/stable.hpp"

namespace stablegof::detail {

class LogDensityTable {
public:
    LogDensityTable(double alpha, double h, double x_max)
        : sd_(alpha), h_(h), u_max_(std::asinh(x_max)) {
        const int n = static_cast<int>(std::ceil(u_max_ / h_)) + 1;
        g_.resize(n);
        dg_.resize(n);
        for (int i = 0; i < n; ++i) {
            const double u = i * h_;
            const double x = std::sinh(u);
            const auto le = sd_.log_eval(x);
            g_[i] = le.logf;
            dg_[i] = le.dx * std::cosh(u);
        }
        u_max_ = (n - 1) * h_;
    }

    double alpha() const { return sd_.alpha(); }

    // log f(x) and d/dx log f(x).
    void eval(double x, double& logf, double& dlogf) const {
        const double ax = std::abs(x);
        const double u = std::asinh(ax);
        if (u >= u_max_) {
            const auto le = sd_.log_eval(ax);
            logf = le.logf;
            dlogf = x < 0 ? -le.dx : le.dx;
            return;
        }
        const int i = static_cast<int>(u / h_);
        const double t = u / h_ - i;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        const double g0 = g_[i], g1 = g_[i + 1], d0 = dg_[i] * h_, d1 = dg_[i + 1] * h_;
        logf = h00 * g0 + h10 * d0 + h01 * g1 + h11 * d1;
        const double dt = (6 * t2 - 6 * t) * g0 + (3 * t2 - 4 * t + 1) * d0 + (-6 * t2 + 6 * t) * g1 +
                          (3 * t2 - 2 * t) * d1;
        dlogf = dt / h_ / std::cosh(u);
        if (x < 0) dlogf = -dlogf;
    }

    double logf(double x) const {
        double l, d;
        eval(x, l, d);
        return l;
    }

    const StableDensity& exact() const { return sd_; }

private:
    StableDensity sd_;
    double h_;
    double u_max_;
    std::vector<double> g_, dg_;
};

}  // namespace stablegof::detail
