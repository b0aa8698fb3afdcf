#include "stablegof/inversion.hpp"

#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/roots.hpp>

namespace stablegof {

namespace {

constexpr double kCoincident = 1e-10;
constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kBracketStep = 1.25;
constexpr double kBracketBound = 1e-7;

// sum_k (-1)^k int_0^1 e^{-xy} sqrt(ab) / (y^p sqrt|prod_{j != pair} (1 - 2y/lambda_j)|) dz,
// y = (b - a)/2 cos(pi z) + (b + a)/2, a = lambda_{2k-1}/2, b = lambda_{2k}/2.
// p = 1 gives 1 - F, p = 0 gives -f.
SeriesValue slepian(double x, const InversionConfig& c, int p) {
    if (!(x > 0.0)) throw DomainError("D_kappa argument must be positive");
    c.validate();
    const auto& lam = c.spectrum->lambdas;
    const int m = std::min<int>(c.m, lam.size());
    const int l = std::min(c.l, m / 2);
    SeriesValue out;
    out.terms = l;
    out.products = m;
    if (l < 1) throw NumericalError("spectrum has fewer than two eigenvalues");

    // Every eigenvalue paired: the finite sum is the whole series and cannot diverge.
    const bool complete = 2 * l == static_cast<int>(lam.size());
    double sum = 0.0, prev_sum = 0.0, prev_mag = INFINITY;
    bool past_peak = false, last_rising = false;
    for (int k = 1; k <= l; ++k) {
        const double a = 0.5 * lam[2 * k - 2], b = 0.5 * lam[2 * k - 1];
        // A coincident pair keeps a finite term: the cosine substitution absorbs the interval width.
        if (b - a <= kCoincident * b) ++out.degenerate;
        auto g = [&](double z) {
            const double y = 0.5 * (b - a) * std::cos(kPi * z) + 0.5 * (b + a);
            double lp = 0.0;
            for (int j = 0; j < m; ++j) {
                if (j == 2 * k - 2 || j == 2 * k - 1) continue;
                lp += std::log(std::abs(1.0 - 2.0 * y / lam[j]));
            }
            return std::exp(-x * y - 0.5 * lp + 0.5 * std::log(a * b) - p * std::log(y));
        };
        const auto r = quad::adaptive(g, 0.0, 1.0, {c.quad_rel_tol, 0.0, 2000});
        quad::require(r, "Slepian term");
        const double term = (k % 2 == 0 ? 1.0 : -1.0) * r.value;
        const double mag = std::abs(term);
        // Terms may rise for small x before e^{-xy} takes over; growth after the peak means divergence.
        const bool rising = mag > prev_mag * (1.0 + 1e-9) && mag > 1e-300;
        if (rising && past_peak && !complete)
            throw NumericalError("Slepian series terms are not decreasing (k = " + std::to_string(k) + ")");
        if (!rising && prev_mag != INFINITY) past_peak = true;
        last_rising = rising;
        prev_mag = mag;
        prev_sum = sum;
        sum += term;
    }
    if (last_rising && !complete)
        throw NumericalError("Slepian series terms still growing after " + std::to_string(l) + " terms");
    if (complete) {
        out.value = sum;
        out.bound = 0.0;
    } else {
        out.value = 0.5 * (sum + prev_sum);
        out.bound = 0.5 * std::abs(sum - prev_sum);
    }
    return out;
}

}  // namespace

InversionConfig InversionConfig::defaults(std::shared_ptr<const Spectrum> s) {
    InversionConfig c;
    const double kappa = s->kernel.kappa;
    c.l = kappa <= 2.5 ? 25 : 10;
    c.m = kappa <= 5.0 ? 500 : 300;
    c.spectrum = std::move(s);
    return c;
}

void InversionConfig::validate() const {
    if (!spectrum) throw DomainError("inversion needs a spectrum");
    if (l < 1 || m <= l) throw DomainError("inversion needs 1 <= l < m");
    if (!(quad_rel_tol > 0.0 && quad_rel_tol <= 1e-5)) throw DomainError("quadrature tolerance must be in (0, 1e-5]");
}

SeriesValue cdf_dk_series(double x, const InversionConfig& c) {
    SeriesValue s = slepian(x, c, 1);
    s.value = 1.0 + s.value;
    return s;
}

SeriesValue pdf_dk_series(double x, const InversionConfig& c) {
    SeriesValue s = slepian(x, c, 0);
    s.value = -s.value;
    return s;
}

double cdf_dk(double x, const InversionConfig& c) { return cdf_dk_series(x, c).value; }
double pdf_dk(double x, const InversionConfig& c) { return pdf_dk_series(x, c).value; }

QuantileResult quantile_dk_bounded(double xi, const InversionConfig& c) {
    if (!(xi > 0.0 && xi < 0.5)) throw DomainError("upper-tail level must lie in (0, 0.5)");
    c.validate();
    const double target = 1.0 - xi;
    const double mean = c.spectrum->mean();
    double lo = mean / 10.0, hi = mean * 10.0;
    auto F = [&](double x) { return cdf_dk(x, c) - target; };
    // The truncated series is unusable far below the mean when the spectrum grows slowly;
    // raise the lower end until the series there has converged.
    for (;; lo *= kBracketStep) {
        if (lo >= mean) throw NumericalError("no convergent lower bracket below E[D] for the quantile");
        try {
            const SeriesValue s = cdf_dk_series(lo, c);
            if (s.bound <= kBracketBound && s.value >= -kBracketBound && s.value <= 1.0) break;
        } catch (const NumericalError&) {
        }
    }
    const double flo = F(lo), fhi = F(hi);
    if (!(flo < 0.0 && fhi > 0.0))
        throw NumericalError("quantile bracket [E/10, 10E] does not contain the " + std::to_string(xi) + " point");
    std::uintmax_t iters = 100;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-10 * std::abs(a); };
    const auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, tol, iters);
    QuantileResult q;
    q.x = 0.5 * (r.first + r.second);
    const SeriesValue cdf = cdf_dk_series(q.x, c);
    if (std::abs(cdf.value - target) > 1e-5) throw NumericalError("quantile root did not reach |F - (1 - xi)| < 1e-5");
    const double dens = pdf_dk(q.x, c);
    q.series_bound = dens > 0.0 ? cdf.bound / dens : INFINITY;
    return q;
}

double quantile_dk(double xi, const InversionConfig& c) { return quantile_dk_bounded(xi, c).x; }

}  // namespace stablegof
