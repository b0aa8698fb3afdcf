#include "stablegof/transform.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include "stablegof/error.hpp"

namespace stablegof {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
// exp(-46) ~ 1e-20: beyond this t the integrand is negligible even with the
// t^alpha log t factor of C2.
constexpr double kTailExponent = 46.0;
constexpr double kHeadRatio = 0.25;
constexpr double kHeadEps = 1e-9;
constexpr int kMaxRows = 600;
constexpr int kMaxCols = 200;

template <int N>
std::array<double, N> gl_nodes() {
    const auto& x = boost::math::quadrature::gauss<double, N>::abscissa();
    std::array<double, N> out{};
    int i = 0;
    for (auto it = x.rbegin(); it != x.rend(); ++it)
        if (*it > 0) out[i++] = -*it;
    for (double v : x) out[i++] = v;
    return out;
}

template <int N>
std::array<double, N> gl_weights() {
    const auto& x = boost::math::quadrature::gauss<double, N>::abscissa();
    const auto& w = boost::math::quadrature::gauss<double, N>::weights();
    std::array<double, N> out{};
    int i = 0;
    for (std::size_t j = x.size(); j-- > 0;)
        if (x[j] > 0) out[i++] = w[j];
    for (double v : w) out[i++] = v;
    return out;
}

}  // namespace

DampedStableTransform::DampedStableTransform(double alpha, double c, double gamma, int channels)
    : alpha_(alpha), c_(c), gamma_(gamma), nc_(channels) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("damping constant must be >= 0");
    if (!(gamma > 0.0 && gamma <= 2.0)) throw DomainError("damping exponent must lie in (0, 2]");
    if (channels != 1 && channels != 3) throw DomainError("channels must be 1 or 3");

    double lo = 0.0, hi = 1.0;
    while (g_exponent(hi) < kTailExponent) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g_exponent(mid) < kTailExponent ? lo : hi) = mid;
    }
    T_ = hi;

    // Channels whose series decide the switch point. With alpha = 2 and no
    // damping C0, C1 are Gaussian closed forms and only C2 needs a series.
    int mask = nc_ == 1 ? 1 : 7;
    if (alpha_ == 2.0 && c_ == 0.0) mask &= 4;

    const double scale = c_ > 0.0 ? std::max(1.0, std::pow(c_, 1.0 / gamma_)) : 1.0;
    crossover_ = 200.0 * scale;
    if (mask != 0) {
        for (double y = 0.25 * scale; y < 200.0 * scale; y *= 1.08) {
            if (series_ok(y, mask) && series_ok(1.08 * y, mask)) {
                crossover_ = y;
                break;
            }
        }
    } else {
        crossover_ = std::numeric_limits<double>::infinity();
    }
    build_grid(std::isfinite(crossover_) ? crossover_ : 1.0);
}

double DampedStableTransform::g_exponent(double t) const {
    return std::pow(t, alpha_) + (c_ > 0.0 ? c_ * std::pow(t, gamma_) : 0.0);
}

void DampedStableTransform::build_series_rows(int kmax, int mmax) {
    const int mcap = c_ > 0.0 ? mmax : 0;
    if (static_cast<int>(rows_.size()) < kmax + 1) rows_.resize(kmax + 1);
    const double logc = c_ > 0.0 ? std::log(c_) : 0.0;
    std::vector<double> logfact_m(mcap + 1);
    for (int m = 0; m <= mcap; ++m) logfact_m[m] = std::lgamma(m + 1.0);
    for (int k = 0; k <= kmax; ++k) {
        auto& row = rows_[k];
        const double logfact_k = std::lgamma(k + 1.0);
        row.reserve(mcap + 1);
        for (int m = static_cast<int>(row.size()); m <= mcap; ++m) {
            Term t;
            t.k = k;
            t.m = m;
            t.beta = k * alpha_ + m * gamma_;
            t.logmag = std::lgamma(t.beta + 1.0) - logfact_k - logfact_m[m] +
                       (m > 0 ? m * logc : 0.0);
            const double half = 0.5 * t.beta;
            t.zero_sine = std::abs(half - std::round(half)) < 1e-13;
            if (t.zero_sine) {
                t.s = 0.0;
                t.co = (static_cast<long long>(std::llround(half)) % 2 == 0) ? 1.0 : -1.0;
            } else {
                t.s = std::sin(kPi * half);
                t.co = std::cos(kPi * half);
            }
            t.psi = nc_ == 3 ? boost::math::digamma(t.beta + 1.0) : 0.0;
            row.push_back(t);
        }
    }
}

// Evaluates the small-t expansion; rows are extended on demand during
// construction only (the object is immutable afterwards).
bool DampedStableTransform::series_ok(double y, int mask) const {
    auto self = const_cast<DampedStableTransform*>(this);
    // Make sure enough rows exist for the scan; extension is cheap relative
    // to the scan itself and only happens in the constructor.
    const int want_rows = std::min(kMaxRows, std::max<int>(rows_.size(), 40));
    const int want_cols = c_ > 0.0 ? std::min(kMaxCols, 24) : 0;
    if (static_cast<int>(rows_.size()) < want_rows + 1 ||
        (c_ > 0.0 && static_cast<int>(rows_[0].size()) < want_cols + 1))
        self->build_series_rows(want_rows, want_cols);
    SeriesResult r = series(y);
    // Grow the table while the estimate is limited by its size.
    for (int attempt = 0; attempt < 3; ++attempt) {
        double worst = 0.0;
        for (int ch = 0; ch < 3; ++ch)
            if ((mask >> ch) & 1) worst = std::max(worst, r.rel_error[ch]);
        if (worst < kSeriesTarget) return true;
        // Far from converged: more terms will not rescue this y.
        if (worst > 1e-4) return false;
        const int rows = static_cast<int>(rows_.size()) - 1;
        const int cols = c_ > 0.0 ? static_cast<int>(rows_[0].size()) - 1 : 0;
        const int new_rows = r.rows_limited ? std::min(kMaxRows, 2 * rows) : rows;
        const int new_cols = r.cols_limited ? std::min(kMaxCols, 2 * cols) : cols;
        if (new_rows == rows && new_cols == cols) return false;
        self->build_series_rows(new_rows, new_cols);
        r = series(y);
    }
    return false;
}

DampedStableTransform::SeriesResult DampedStableTransform::series(double y) const {
    SeriesResult out;
    const double ay = std::abs(y);
    if (!(ay > 0.0)) {
        out.rel_error = {INFINITY, INFINITY, INFINITY};
        return out;
    }
    const double ly = std::log(ay);
    std::array<double, 3> S{}, A{}, E{};
    double prev_lead = INFINITY;
    std::array<double, 3> prev_lead_bound{INFINITY, INFINITY, INFINITY};
    const double tiny = 1e-300;
    bool finished = false;

    for (std::size_t k = 0; k < rows_.size(); ++k) {
        const auto& row = rows_[k];
        double prev_mag = INFINITY;
        std::array<double, 3> prev_b{INFINITY, INFINITY, INFINITY};
        std::array<double, 3> lead_b{0, 0, 0};
        double lead = 0.0;
        bool row_done = false;
        for (std::size_t m = 0; m < row.size(); ++m) {
            const Term& t = row[m];
            if (k == 0 && m == 0) continue;  // beta = 0 term is identically zero
            const double mag = std::exp(t.logmag - (t.beta + 1.0) * ly);
            const double sgn = ((k + m) % 2 == 0) ? 1.0 : -1.0;
            // Bounds ignore the sine factor: a vanishing term says nothing about
            // the size of the next one.
            std::array<double, 3> b{mag, mag * (t.beta + 1.0) / ay,
                                    mag * k * (std::abs(t.psi) + std::abs(ly) + 0.5 * kPi)};
            if (m == 0 || (k == 0 && m == 1)) {
                lead = mag;
                lead_b = b;
            }
            if (m >= 1 && !(k == 0 && m == 1) && mag > prev_mag) {
                for (int ch = 0; ch < 3; ++ch) E[ch] += prev_b[ch];
                row_done = true;
                break;
            }
            const double t0 = -sgn * mag * t.s;
            const double t1 = t0 * (t.beta + 1.0) / ay;
            const double t2 = sgn * mag * k * (t.psi * t.s + 0.5 * kPi * t.co - ly * t.s);
            S[0] += t0;
            S[1] += t1;
            S[2] += t2;
            A[0] += std::abs(t0);
            A[1] += std::abs(t1);
            A[2] += std::abs(t2);
            prev_mag = mag;
            prev_b = b;
            bool small = true;
            for (int ch = 0; ch < 3; ++ch) small = small && b[ch] < 1e-17 * (std::abs(S[ch]) + tiny);
            if (small && m >= 1) {
                row_done = true;
                break;
            }
        }
        if (!row_done && c_ > 0.0) {
            for (int ch = 0; ch < 3; ++ch) E[ch] += prev_b[ch];
            out.cols_limited = true;
        }
        if (k >= 2 && lead > prev_lead) {
            // Asymptotic regime in k: stop at the smallest row.
            for (int ch = 0; ch < 3; ++ch) E[ch] += prev_lead_bound[ch];
            finished = true;
            break;
        }
        if (k >= 1) {
            bool small = true;
            for (int ch = 0; ch < 3; ++ch)
                small = small && lead_b[ch] < 1e-17 * (std::abs(S[ch]) + tiny);
            if (small) {
                finished = true;
                break;
            }
        }
        prev_lead = lead;
        prev_lead_bound = lead_b;
    }
    if (!finished) {
        for (int ch = 0; ch < 3; ++ch) E[ch] += prev_lead_bound[ch];
        out.rows_limited = true;
    }

    if (y < 0) S[1] = -S[1];
    out.value = S;
    for (int ch = 0; ch < 3; ++ch) {
        const double denom = std::abs(S[ch]);
        out.rel_error[ch] = denom > 0 ? (E[ch] + 1e-16 * A[ch]) / denom : INFINITY;
    }
    return out;
}

void DampedStableTransform::build_grid(double omega) {
    static const auto x10 = gl_nodes<10>();
    static const auto w10 = gl_weights<10>();
    static const auto x20 = gl_nodes<20>();
    static const auto w20 = gl_weights<20>();

    W_ = std::min(kPi / omega, 1.0);
    if (W_ > T_) W_ = T_;
    a0_ = W_;
    head_eps_ = kHeadEps * W_;

    auto values = [&](double t, double w, std::array<double, 3>& v) {
        const double ta = std::pow(t, alpha_);
        const double g = std::exp(-ta - (c_ > 0.0 ? c_ * std::pow(t, gamma_) : 0.0));
        v[0] = w * g;
        v[1] = w * t * g;
        v[2] = w * ta * std::log(t) * g;
    };

    head_t_.clear();
    for (auto& h : head_v_) h.clear();
    std::array<double, 3> v{};
    double hi = W_;
    while (hi > head_eps_) {
        const double lo = std::max(hi * kHeadRatio, head_eps_);
        const double cen = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
        for (int i = 0; i < 20; ++i) {
            const double t = cen + half * x20[i];
            values(t, half * w20[i], v);
            head_t_.push_back(t);
            for (int ch = 0; ch < nc_; ++ch) head_v_[ch].push_back(v[ch]);
        }
        hi = lo;
    }

    panels_ = T_ > a0_ ? static_cast<std::size_t>(std::ceil((T_ - a0_) / W_)) : 0;
    for (int i = 0; i < 10; ++i) d_[i] = 0.5 * W_ * (1.0 + x10[i]);
    for (int ch = 0; ch < 3; ++ch) pan_v_[ch].assign(ch < nc_ ? 10 * panels_ : 0, 0.0);
    for (std::size_t p = 0; p < panels_; ++p) {
        const double a = a0_ + p * W_;
        for (int i = 0; i < 10; ++i) {
            values(a + d_[i], 0.5 * W_ * w10[i], v);
            for (int ch = 0; ch < nc_; ++ch) pan_v_[ch][10 * p + i] = v[ch];
        }
    }
}

std::array<double, 3> DampedStableTransform::grid(double y) const {
    const double ay = std::abs(y);
    std::array<double, 3> out{};
    // [0, eps]: g ~ 1 there.
    out[0] = head_eps_;
    out[2] = std::pow(head_eps_, alpha_ + 1.0) *
             (std::log(head_eps_) / (alpha_ + 1.0) - 1.0 / ((alpha_ + 1.0) * (alpha_ + 1.0)));
    for (std::size_t i = 0; i < head_t_.size(); ++i) {
        const double ph = head_t_[i] * ay;
        const double cs = std::cos(ph);
        out[0] += head_v_[0][i] * cs;
        if (nc_ == 3) {
            out[1] += head_v_[1][i] * std::sin(ph);
            out[2] += head_v_[2][i] * cs;
        }
    }

    using cplx = std::complex<double>;
    std::array<cplx, 10> e;
    for (int i = 0; i < 10; ++i) e[i] = std::polar(1.0, d_[i] * ay);
    const cplx rot = std::polar(1.0, W_ * ay);
    cplx z;
    for (std::size_t p = 0; p < panels_; ++p) {
        // Resynchronize the rotating phase to keep rounding from accumulating.
        if (p % 64 == 0) z = std::polar(1.0, (a0_ + p * W_) * ay);
        const double* v0 = &pan_v_[0][10 * p];
        double re = 0.0, im = 0.0;
        for (int i = 0; i < 10; ++i) {
            re += v0[i] * e[i].real();
            im += v0[i] * e[i].imag();
        }
        out[0] += z.real() * re - z.imag() * im;
        if (nc_ == 3) {
            const double* v1 = &pan_v_[1][10 * p];
            const double* v2 = &pan_v_[2][10 * p];
            double re1 = 0.0, im1 = 0.0, re2 = 0.0, im2 = 0.0;
            for (int i = 0; i < 10; ++i) {
                re1 += v1[i] * e[i].real();
                im1 += v1[i] * e[i].imag();
                re2 += v2[i] * e[i].real();
                im2 += v2[i] * e[i].imag();
            }
            out[1] += z.imag() * re1 + z.real() * im1;
            out[2] += z.real() * re2 - z.imag() * im2;
        }
        z *= rot;
    }
    if (y < 0) out[1] = -out[1];
    return out;
}

std::array<double, 3> DampedStableTransform::reference(double y, const quad::Options& opt) const {
    return adaptive(alpha_, c_, gamma_, y, opt);
}

std::array<double, 3> DampedStableTransform::adaptive(double alpha, double c, double gamma, double y,
                                                      const quad::Options& opt) {
    double T = 1.0;
    auto expo = [&](double t) { return std::pow(t, alpha) + (c > 0.0 ? c * std::pow(t, gamma) : 0.0); };
    while (expo(T) < kTailExponent) T *= 1.25;
    const double ay = std::abs(y);
    auto f = [&](double t) -> std::array<double, 3> {
        if (t <= 0.0) return {1.0, 0.0, 0.0};
        const double ta = std::pow(t, alpha);
        const double g = std::exp(-ta - (c > 0.0 ? c * std::pow(t, gamma) : 0.0));
        const double cs = std::cos(t * ay);
        return {cs * g, t * std::sin(t * ay) * g, cs * ta * std::log(t) * g};
    };
    // Panels no wider than half a period keep each piece free of sign changes.
    const double width = std::min(1.0, kPi / std::max(ay, 1e-300));
    std::array<double, 3> out{};
    for (double a = 0.0; a < T; a += width) {
        const double b = std::min(T, a + width);
        auto r = quad::adaptive(f, a, b, opt);
        if (!r.converged && r.error > 1e3 * std::max(opt.abs_tol, opt.rel_tol * quad::detail::Ops<std::array<double, 3>>::norm(r.value)))
            throw NumericalError("density inversion quadrature did not converge");
        for (int ch = 0; ch < 3; ++ch) out[ch] += r.value[ch];
    }
    if (y < 0) out[1] = -out[1];
    return out;
}

std::array<double, 3> DampedStableTransform::operator()(double y) const {
    const double ay = std::abs(y);
    const bool gauss = alpha_ == 2.0 && c_ == 0.0;
    std::array<double, 3> out{};
    if (gauss) {
        const double e = 0.5 * std::sqrt(kPi) * std::exp(-0.25 * ay * ay);
        out[0] = e;
        out[1] = 0.5 * y * e;
        if (nc_ == 1) return out;
    }
    std::array<double, 3> v;
    if (ay <= crossover_) {
        v = grid(y);
    } else {
        const SeriesResult s = series(y);
        bool good = true;
        for (int ch = gauss ? 2 : 0; ch < nc_; ++ch) good = good && s.rel_error[ch] < 1e-11;
        v = good ? s.value : reference(y);
    }
    if (gauss) {
        out[2] = v[2];
        return out;
    }
    return v;
}

}  // namespace stablegof
