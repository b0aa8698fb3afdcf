#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "density_table.hpp"
#include "stablegof/estimators.hpp"
#include "stablegof/optimize.hpp"

namespace stablegof {

namespace {

constexpr double kGridStep = 0.05;
constexpr int kSigmaGrid = 40;
constexpr double kSigmaLo = 0.15, kSigmaHi = 6.0;

double quantile_sorted(const std::vector<double>& s, double p) {
    const double pos = p * (s.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - i;
    return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
}

// Coarse log-density tables for the initialization grid, shared by all fits
// in the process and built on first use.
const detail::LogDensityTable& grid_table(double alpha) {
    static std::mutex mu;
    static std::map<long, std::unique_ptr<detail::LogDensityTable>> tables;
    const long key = std::lround(alpha * 1e6);
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = tables[key];
    if (!slot) slot = std::make_unique<detail::LogDensityTable>(alpha, 0.04, 1e6);
    return *slot;
}

std::vector<double> alpha_grid(double alpha_min) {
    std::vector<double> g;
    for (int i = 0;; ++i) {
        const double a = 2.0 - i * kGridStep;
        if (a < alpha_min - 1e-12) break;
        g.push_back(a);
    }
    std::reverse(g.begin(), g.end());
    return g;
}

}  // namespace

Standardization robust_standardization(const std::vector<double>& data) {
    if (data.empty()) throw DomainError("empty sample");
    std::vector<double> s(data);
    std::sort(s.begin(), s.end());
    const double med = quantile_sorted(s, 0.5);
    double scale = 0.5 * (quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25));
    if (!(scale > 0.0)) {
        double mad = 0.0;
        for (double x : s) mad += std::abs(x - med);
        scale = mad / s.size();
    }
    if (!(scale > 0.0)) throw DomainError("degenerate sample: all observations are identical");
    return {med, scale};
}

double mle_loglik(const std::vector<double>& data, const StableParams& p, std::array<double, 3>* grad) {
    p.validate();
    const StableDensity sd(p.alpha);
    double ll = 0.0, gm = 0.0, gs = 0.0, ga = 0.0;
    for (double x : data) {
        const double y = (x - p.mu) / p.sigma;
        const auto le = sd.log_eval(y);
        ll += le.logf;
        gm -= le.dx;
        gs -= y * le.dx;
        ga += le.dalpha;
    }
    const double n = static_cast<double>(data.size());
    if (grad) {
        (*grad)[0] = gm / (n * p.sigma);
        (*grad)[1] = (gs / n - 1.0) / p.sigma;
        (*grad)[2] = ga / n;
    }
    return ll / n - std::log(p.sigma);
}

FitReport mle_fit(const std::vector<double>& data, const FitOptions& opt) {
    if (data.size() < 5) throw DomainError("mle_fit needs at least 5 observations");
    for (double x : data)
        if (!std::isfinite(x)) throw DomainError("non-finite observation");
    if (opt.fixed_alpha && !(*opt.fixed_alpha > 0.0 && *opt.fixed_alpha <= 2.0))
        throw DomainError("fixed alpha must lie in (0, 2]");
    const Standardization st = robust_standardization(data);
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = (data[i] - st.center) / st.scale;
    const double n = static_cast<double>(y.size());

    // Profile grid search at mu = median.
    const std::vector<double> alphas =
        opt.fixed_alpha ? std::vector<double>{*opt.fixed_alpha} : alpha_grid(opt.alpha_min);
    double best = -INFINITY, a0 = alphas.back(), s0 = 1.0;
    for (double a : alphas) {
        const detail::LogDensityTable* tab = nullptr;
        std::unique_ptr<detail::LogDensityTable> own;
        if (opt.fixed_alpha && std::abs(std::round(a / kGridStep) * kGridStep - a) > 1e-12) {
            own = std::make_unique<detail::LogDensityTable>(a, 0.04, 1e6);
            tab = own.get();
        } else {
            tab = &grid_table(a);
        }
        for (int k = 0; k < kSigmaGrid; ++k) {
            const double s = kSigmaLo * std::pow(kSigmaHi / kSigmaLo, k / double(kSigmaGrid - 1));
            double ll = -n * std::log(s);
            for (double v : y) ll += tab->logf(v / s);
            if (ll > best) {
                best = ll;
                a0 = a;
                s0 = s;
            }
        }
    }

    // Quasi-Newton on z = (mu, log sigma, alpha) in standardized units.
    std::unique_ptr<StableDensity> sd;
    auto density = [&](double a) -> const StableDensity& {
        if (!sd || sd->alpha() != a) sd = std::make_unique<StableDensity>(a);
        return *sd;
    };
    const bool fixed = opt.fixed_alpha.has_value();
    Objective obj = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
        const double mu = z[0], sig = std::exp(z[1]);
        const double a = fixed ? *opt.fixed_alpha : z[2];
        const StableDensity& d = density(a);
        double ll = 0.0, gm = 0.0, gs = 0.0, ga = 0.0;
        for (double v : y) {
            const double u = (v - mu) / sig;
            const auto le = d.log_eval(u);
            ll += le.logf;
            gm += le.dx;
            gs += u * le.dx;
            ga += le.dalpha;
        }
        g[0] = gm / (n * sig);
        g[1] = gs / n + 1.0;
        if (!fixed) g[2] = -ga / n;
        return -(ll / n - z[1]);
    };
    const int dim = fixed ? 2 : 3;
    Eigen::VectorXd z0(dim), lo(dim), hi(dim);
    z0[0] = 0.0;
    z0[1] = std::log(s0);
    lo[0] = lo[1] = -INFINITY;
    hi[0] = hi[1] = INFINITY;
    if (!fixed) {
        z0[2] = a0;
        lo[2] = opt.alpha_min;
        hi[2] = 2.0;
    }
    MinimizeOptions mo;
    mo.gtol = opt.gtol;
    mo.max_iter = opt.max_iter;
    const MinimizeResult r = minimize_box(obj, z0, lo, hi, mo);

    FitReport rep;
    rep.params.mu = st.center + st.scale * r.x[0];
    rep.params.sigma = st.scale * std::exp(r.x[1]);
    rep.params.alpha = fixed ? *opt.fixed_alpha : r.x[2];
    rep.objective = r.value + std::log(st.scale);
    rep.projected_gradient = r.projected_gradient;
    rep.iterations = r.iterations;
    rep.evaluations = r.evaluations;
    rep.converged = r.converged;
    rep.alpha_at_boundary = rep.params.alpha >= 2.0;
    if (!r.converged)
        throw ConvergenceError("mle_fit did not converge (projected gradient " +
                                   std::to_string(r.projected_gradient) + ")",
                               rep);
    return rep;
}

}  // namespace stablegof
