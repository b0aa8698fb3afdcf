#include "stablegof/ecf_test.hpp"

#include <cmath>

#include "stablegof/transform.hpp"

namespace stablegof {

namespace {

void check_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
}

// t beyond which e^{-kappa t} < 1e-16/kappa.
double kappa_cutoff(double kappa) { return (16.0 * std::log(10.0) + std::log(kappa)) / kappa; }

std::vector<double> standardize(const std::vector<double>& data, const StableParams& p) {
    p.validate();
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = (data[i] - p.mu) / p.sigma;
    return y;
}

double pair_sum(const std::vector<double>& y, double kappa) {
    const double n = static_cast<double>(y.size());
    const double k2 = kappa * kappa;
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
        for (std::size_t k = j + 1; k < y.size(); ++k) {
            const double d = y[j] - y[k];
            s += 1.0 / (k2 + d * d);
        }
    // Off-diagonal pairs twice plus the n diagonal terms 2/kappa.
    return (4.0 * kappa * s + 2.0 * n / kappa) / n;
}

}  // namespace

cplx ecf(double t, const std::vector<double>& y) {
    if (y.empty()) throw DomainError("ecf of an empty sample");
    double c = 0.0, s = 0.0;
    for (double v : y) {
        c += std::cos(t * v);
        s += std::sin(t * v);
    }
    return {c / y.size(), s / y.size()};
}

double ecf_i1(double y, double alpha, double kappa) {
    check_kappa(kappa);
    if (alpha == 1.0) {
        const double a = kappa + 1.0;
        return 2.0 * a / (a * a + y * y);
    }
    const DampedStableTransform tr(alpha, kappa, 1.0, 1);
    return 2.0 * tr(y)[0];
}

double ecf_i2(double alpha, double kappa) {
    check_kappa(kappa);
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    auto f = [&](double t) { return std::exp(-2.0 * std::pow(t, alpha) - kappa * t); };
    const double T = kappa_cutoff(kappa);
    return 2.0 * quad::require(quad::adaptive(f, 0.0, T, {1e-12, 1e-300, 4000}), "I2 integral");
}

std::vector<TestOutcome> test_statistics(const std::vector<double>& data, const StableParams& fitted,
                                         const std::vector<double>& kappas, Hypothesis h) {
    if (data.empty()) throw DomainError("empty sample");
    const std::vector<double> y = standardize(data, fitted);
    const double n = static_cast<double>(y.size());
    const double a = fitted.alpha;
    std::vector<TestOutcome> out;
    for (double kappa : kappas) {
        check_kappa(kappa);
        double i1 = 0.0;
        if (a == 1.0) {
            for (double v : y) i1 += ecf_i1(v, 1.0, kappa);
        } else {
            const DampedStableTransform tr(a, kappa, 1.0, 1);
            for (double v : y) i1 += 2.0 * tr(v)[0];
        }
        TestOutcome t;
        // Cancellation leaves roundoff of either sign when the fit is near perfect.
        t.statistic = std::max(0.0, pair_sum(y, kappa) - 2.0 * i1 + n * ecf_i2(a, kappa));
        t.fitted = fitted;
        t.kappa = kappa;
        t.hypothesis = h;
        t.n = y.size();
        out.push_back(t);
    }
    return out;
}

TestOutcome test_statistic(const std::vector<double>& data, const StableParams& fitted, double kappa,
                           Hypothesis h) {
    return test_statistics(data, fitted, {kappa}, h).front();
}

double test_statistic_direct(const std::vector<double>& data, const StableParams& fitted, double kappa) {
    check_kappa(kappa);
    if (data.empty()) throw DomainError("empty sample");
    const std::vector<double> y = standardize(data, fitted);
    const double n = static_cast<double>(y.size());
    auto f = [&](double t) {
        const cplx d = ecf(t, y) - std::exp(-std::pow(t, fitted.alpha));
        return std::norm(d) * std::exp(-kappa * t);
    };
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    const double T = kappa_cutoff(kappa);
    const double width = std::min(0.5, 3.14159 / std::max(ymax, 1e-3));
    double total = 0.0;
    for (double lo = 0.0; lo < T; lo += width)
        total += quad::require(quad::adaptive(f, lo, std::min(T, lo + width), {1e-12, 1e-300, 2000}), "direct D");
    return 2.0 * n * total;
}

std::vector<TestOutcome> fit_and_test(const std::vector<double>& data, const std::vector<double>& kappas,
                                      const TestOptions& opt) {
    FitOptions fo;
    if (opt.hypothesis == Hypothesis::H2) {
        if (!opt.alpha0) throw DomainError("H2 requires alpha0");
        fo.fixed_alpha = *opt.alpha0;
    }
    const FitReport fit = opt.estimator == Estimator::mle ? mle_fit(data, fo) : eise_fit(data, opt.eise_weight, fo);
    return test_statistics(data, fit.params, kappas, opt.hypothesis);
}

}  // namespace stablegof
