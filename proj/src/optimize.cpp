#include "stablegof/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace stablegof {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

MinimizeResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper, const MinimizeOptions& opt) {
    const Eigen::Index n = x0.size();
    MinimizeResult r;
    Eigen::VectorXd x = clamp(x0, lower, upper);
    Eigen::VectorXd g(n);
    double fx = f(x, g);
    r.evaluations = 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;

    auto projected = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& gg) {
        return (xx - clamp(xx - gg, lower, upper)).cwiseAbs().maxCoeff();
    };

    for (r.iterations = 0; r.iterations < opt.max_iter; ++r.iterations) {
        const double pg = projected(x, g);
        if (!std::isfinite(fx) || !g.allFinite()) break;
        if (pg <= opt.gtol) {
            r.converged = true;
            break;
        }
        std::vector<bool> active(n, false);
        for (Eigen::Index i = 0; i < n; ++i)
            active[i] = (x[i] <= lower[i] && g[i] > 0) || (x[i] >= upper[i] && g[i] < 0);
        Eigen::MatrixXd Hf = H;
        Eigen::VectorXd gf = g;
        for (Eigen::Index i = 0; i < n; ++i)
            if (active[i]) {
                Hf.row(i).setZero();
                Hf.col(i).setZero();
                gf[i] = 0.0;
            }
        Eigen::VectorXd d = -Hf * gf;
        if (gf.dot(d) >= 0.0) {
            H.setIdentity();
            scaled = false;
            d = -gf;
        }
        double t = 1.0;
        if (!scaled) t = std::min(1.0, 1.0 / std::max(1e-300, d.cwiseAbs().maxCoeff()));

        bool accepted = false;
        Eigen::VectorXd xn, gn(n), s;
        double fn = 0.0;
        for (int ls = 0; ls < 50; ++ls) {
            xn = clamp(x + t * d, lower, upper);
            s = xn - x;
            if (s.cwiseAbs().maxCoeff() <= 1e-16 * (1.0 + x.cwiseAbs().maxCoeff())) break;
            fn = f(xn, gn);
            ++r.evaluations;
            if (std::isfinite(fn) && fn <= fx + 1e-4 * g.dot(s)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            r.converged = pg <= opt.stall_gtol;
            break;
        }
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
        x = xn;
        fx = fn;
        g = gn;
    }
    r.x = x;
    r.value = fx;
    r.gradient = g;
    r.projected_gradient = projected(x, g);
    if (r.projected_gradient <= opt.gtol) r.converged = true;
    return r;
}

}  // namespace stablegof
