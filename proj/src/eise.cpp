#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "density_table.hpp"
#include "stablegof/estimators.hpp"
#include "stablegof/optimize.hpp"
#include "stablegof/transform.hpp"

namespace stablegof {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
const quad::Options kTight{1e-11, 1e-15, 4000};

// t beyond which w(t) < e^-40.
double weight_cutoff(const WeightSpec& w) { return std::pow(40.0 / w.kappa_or_nu, 1.0 / w.exponent()); }

// 2 int_0^inf e^{-2 t^a} t^p (log t)^q w(t) dt
double even_moment(double alpha, double p, int q, const WeightSpec& w) {
    auto f = [&](double t) {
        if (t <= 0.0) return 0.0;
        const double lt = std::log(t);
        return std::exp(-2.0 * std::pow(t, alpha) + p * lt) * std::pow(lt, q) * w(t);
    };
    const double T = weight_cutoff(w);
    double total = 0.0;
    // Split at 1 where log t changes sign; the rest is smooth.
    auto a = quad::adaptive(f, 0.0, std::min(1.0, T), kTight);
    total += quad::require(a, "EISE moment");
    if (T > 1.0) total += quad::require(quad::adaptive(f, 1.0, T, kTight), "EISE moment");
    return 2.0 * total;
}

// Shared machinery for Q: pair sum P(sigma), G terms and R(alpha).
class EiseProblem {
public:
    EiseProblem(const std::vector<double>& x, const WeightSpec& w, bool tabulate) : x_(x), w_(w) {
        w.validate();
        if (w.kind == WeightSpec::Kind::exp_power) {
            scale_ = std::pow(w.kappa_or_nu, 1.0 / w.bar_alpha);
            if (tabulate)
                table_ = std::make_unique<detail::LogDensityTable>(w.bar_alpha, 0.01, 1e5);
            else
                exact_ = std::make_unique<StableDensity>(w.bar_alpha);
        }
        const std::size_t n = x.size();
        diffs_.reserve(n * (n - 1) / 2);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) diffs_.push_back(std::abs(x[j] - x[k]));
    }

    // w_hat(d) and d/dd w_hat(d).
    void what(double d, double& v, double& dv) const {
        if (w_.kind == WeightSpec::Kind::exp_abs) {
            const double k = w_.kappa_or_nu, q = k * k + d * d;
            v = 2.0 * k / q;
            dv = -4.0 * k * d / (q * q);
            return;
        }
        const double u = d / scale_;
        if (table_) {
            double lf, dl;
            table_->eval(u, lf, dl);
            v = 2.0 * kPi / scale_ * std::exp(lf);
            dv = v * dl / scale_;
        } else {
            const DensityEval e = (*exact_)(u);
            v = 2.0 * kPi / scale_ * e.f;
            dv = 2.0 * kPi / (scale_ * scale_) * e.fprime;
        }
    }

    double value(const StableParams& p, std::array<double, 3>* grad) const {
        const double n = static_cast<double>(x_.size());
        const double sig = p.sigma;
        double P, dP = 0.0, v, dv;
        what(0.0, v, dv);
        P = n * v;
        for (double d : diffs_) {
            what(d / sig, v, dv);
            P += 2.0 * v;
            dP += 2.0 * dv * (-d / (sig * sig));
        }
        P /= n * n;
        dP /= n * n;

        const DampedStableTransform tr(p.alpha, w_.kappa_or_nu, w_.exponent(), grad ? 3 : 1);
        double C = 0.0, dCmu = 0.0, dCsig = 0.0, dCa = 0.0;
        for (double xv : x_) {
            const double y = (xv - p.mu) / sig;
            const auto c = tr(y);
            C += 2.0 * c[0];
            if (grad) {
                const double Gy = -2.0 * c[1], Ga = -2.0 * c[2];
                dCmu += Gy * (-1.0 / sig);
                dCsig += Gy * (-y / sig);
                dCa += Ga;
            }
        }
        C /= n;
        const double R = r_value(p.alpha);
        if (grad) {
            (*grad)[0] = -2.0 * dCmu / n;
            (*grad)[1] = dP - 2.0 * dCsig / n;
            (*grad)[2] = -2.0 * dCa / n + r_derivative(p.alpha);
        }
        return P - 2.0 * C + R;
    }

    // R(alpha) = int e^{-2|t|^alpha} w(t) dt and its alpha-derivative.
    double r_value(double alpha) const {
        auto f = [&](double t) { return std::exp(-2.0 * std::pow(t, alpha)) * w_(t); };
        return 2.0 * quad::require(quad::adaptive(f, 0.0, weight_cutoff(w_), kTight), "EISE R");
    }
    double r_derivative(double alpha) const { return -2.0 * even_moment(alpha, alpha, 1, w_); }

private:
    const std::vector<double>& x_;
    WeightSpec w_;
    double scale_ = 1.0;
    std::unique_ptr<detail::LogDensityTable> table_;
    std::unique_ptr<StableDensity> exact_;
    std::vector<double> diffs_;
};

}  // namespace

void WeightSpec::validate() const {
    if (!(kappa_or_nu > 0.0) || !std::isfinite(kappa_or_nu))
        throw DomainError("weight constant must be positive");
    if (kind == Kind::exp_power && !(bar_alpha > 0.0 && bar_alpha <= 2.0))
        throw DomainError("weighting index must lie in (0, 2]");
}

double WeightSpec::operator()(double t) const {
    return std::exp(-kappa_or_nu * std::pow(std::abs(t), exponent()));
}

double WeightSpec::derivative(double t) const {
    const double e = exponent();
    return -kappa_or_nu * e * std::pow(t, e - 1.0) * (*this)(t);
}

double WeightSpec::transform(double d) const {
    if (kind == Kind::exp_abs) return 2.0 * kappa_or_nu / (kappa_or_nu * kappa_or_nu + d * d);
    const double s = std::pow(kappa_or_nu, 1.0 / bar_alpha);
    return 2.0 * kPi / s * pdf(d / s, bar_alpha).f;
}

double WeightSpec::transform_derivative(double d) const {
    if (kind == Kind::exp_abs) {
        const double q = kappa_or_nu * kappa_or_nu + d * d;
        return -4.0 * kappa_or_nu * d / (q * q);
    }
    const double s = std::pow(kappa_or_nu, 1.0 / bar_alpha);
    return 2.0 * kPi / (s * s) * pdf(d / s, bar_alpha).fprime;
}

std::array<double, 3> eise_scores(double x, double alpha, const WeightSpec& w) {
    w.validate();
    auto f = [&](double t) -> std::array<double, 3> {
        if (t <= 0.0) return {0.0, 0.0, 0.0};
        const double ta = std::pow(t, alpha), e = std::exp(-ta), wt = w(t);
        const double c = (std::cos(t * x) - e) * e * ta * wt;
        return {t * std::sin(t * x) * e * wt, -alpha * c, -c * std::log(t)};
    };
    const double T = weight_cutoff(w);
    const double width = std::min(1.0, kPi / std::max(std::abs(x), 1e-300));
    std::array<double, 3> out{};
    for (double a = 0.0; a < T; a += width) {
        auto r = quad::adaptive(f, a, std::min(T, a + width), kTight);
        for (int i = 0; i < 3; ++i) out[i] += 2.0 * r.value[i];
    }
    return out;
}

EiseMatrices eise_matrices(double alpha, const WeightSpec& w) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    w.validate();
    EiseMatrices m;
    m.alpha = alpha;
    m.weight = w;
    m.A(0, 0) = even_moment(alpha, 2.0, 0, w);
    m.A(1, 1) = alpha * alpha * even_moment(alpha, 2.0 * alpha, 0, w);
    m.A(1, 2) = m.A(2, 1) = alpha * even_moment(alpha, 2.0 * alpha, 1, w);
    m.A(2, 2) = even_moment(alpha, 2.0 * alpha, 2, w);
    m.Bsigma = alpha * even_moment(alpha, alpha, 0, w);
    m.Balpha = even_moment(alpha, alpha, 1, w);

    // H over the positive quadrant (each integrand is even in s and in t),
    // inner integral split at the |s - t| kink.
    auto integrand = [&](double s, double t) -> std::array<double, 4> {
        if (s <= 0.0 || t <= 0.0) return {0, 0, 0, 0};
        const double sa = std::pow(s, alpha), ta = std::pow(t, alpha);
        const double E = std::exp(-sa - ta);
        const double cm = std::exp(-std::pow(std::abs(s - t), alpha));
        const double cp = std::exp(-std::pow(s + t, alpha));
        const double ww = w(s) * w(t) * E;
        const double common = 0.5 * (cm + cp) - E;
        const double sta = sa * ta;
        const double ls = std::log(s), lt = std::log(t);
        return {0.5 * (cm - cp) * s * t * ww, alpha * alpha * common * sta * ww,
                alpha * common * sta * lt * ww, common * sta * ls * lt * ww};
    };
    const double T = weight_cutoff(w);
    const quad::Options inner{1e-10, 1e-16, 2000}, outer{1e-9, 1e-15, 2000};
    auto row = [&](double t) {
        auto g = [&](double s) { return integrand(s, t); };
        auto a = quad::adaptive(g, 0.0, t, inner);
        auto b = quad::adaptive(g, t, std::max(T, t), inner);
        std::array<double, 4> v;
        for (int i = 0; i < 4; ++i) v[i] = a.value[i] + b.value[i];
        return v;
    };
    auto H = quad::adaptive(row, 0.0, T, outer);
    quad::require(H, "EISE H matrix");
    m.H(0, 0) = 4.0 * H.value[0];
    m.H(1, 1) = 4.0 * H.value[1];
    m.H(1, 2) = m.H(2, 1) = 4.0 * H.value[2];
    m.H(2, 2) = 4.0 * H.value[3];
    const Eigen::Matrix3d Ai = m.A.inverse();
    m.J = Ai * m.H * Ai.transpose();
    return m;
}

double eise_objective(const std::vector<double>& data, const StableParams& p, const WeightSpec& w,
                      std::array<double, 3>* grad) {
    if (data.empty()) throw DomainError("empty sample");
    p.validate();
    EiseProblem prob(data, w, false);
    return prob.value(p, grad);
}

double eise_objective_direct(const std::vector<double>& data, const StableParams& p, const WeightSpec& w) {
    p.validate();
    w.validate();
    const double n = static_cast<double>(data.size());
    auto f = [&](double t) {
        double c = 0.0, s = 0.0;
        for (double x : data) {
            const double a = t * (x - p.mu) / p.sigma;
            c += std::cos(a);
            s += std::sin(a);
        }
        c /= n;
        s /= n;
        const double e = std::exp(-std::pow(t, p.alpha));
        return ((c - e) * (c - e) + s * s) * w(t);
    };
    const double T = weight_cutoff(w);
    double total = 0.0;
    for (double a = 0.0; a < T; a += 0.5)
        total += quad::require(quad::adaptive(f, a, std::min(T, a + 0.5), {1e-13, 1e-17, 4000}), "direct Q");
    return 2.0 * total;
}

FitReport eise_fit(const std::vector<double>& data, const WeightSpec& w, const FitOptions& opt) {
    if (data.size() < 5) throw DomainError("eise_fit needs at least 5 observations");
    w.validate();
    const Standardization st = robust_standardization(data);
    std::vector<double> y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = (data[i] - st.center) / st.scale;
    const double n = static_cast<double>(y.size());
    const bool fixed = opt.fixed_alpha.has_value();

    // Grid search on a fixed Gauss-Legendre t-rule (initial values only).
    const auto& xg = boost::math::quadrature::gauss<double, 10>::abscissa();
    const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
    const double T = weight_cutoff(w);
    std::vector<double> tn, tw;
    const int panels = 8;
    for (int p = 0; p < panels; ++p) {
        const double a = T * p / panels, h = 0.5 * T / panels;
        for (std::size_t i = 0; i < xg.size(); ++i)
            for (int sgn : {-1, 1}) {
                if (xg[i] == 0.0 && sgn < 0) continue;
                tn.push_back(a + h + sgn * h * xg[i]);
                tw.push_back(h * wg[i] * w(tn.back()));
            }
    }
    std::vector<double> alphas;
    if (fixed)
        alphas.push_back(*opt.fixed_alpha);
    else
        for (double a = 2.0; a >= opt.alpha_min - 1e-12; a -= 0.05) alphas.push_back(a);
    double best = INFINITY, a0 = 2.0, s0 = 1.0;
    std::vector<double> re(tn.size()), im(tn.size());
    for (int k = 0; k < 40; ++k) {
        const double s = 0.15 * std::pow(6.0 / 0.15, k / 39.0);
        for (std::size_t i = 0; i < tn.size(); ++i) {
            double c = 0.0, sn = 0.0;
            for (double v : y) {
                c += std::cos(tn[i] * v / s);
                sn += std::sin(tn[i] * v / s);
            }
            re[i] = c / n;
            im[i] = sn / n;
        }
        for (double a : alphas) {
            double q = 0.0;
            for (std::size_t i = 0; i < tn.size(); ++i) {
                const double e = std::exp(-std::pow(tn[i], a));
                q += tw[i] * ((re[i] - e) * (re[i] - e) + im[i] * im[i]);
            }
            if (q < best) {
                best = q;
                a0 = a;
                s0 = s;
            }
        }
    }

    EiseProblem prob(y, w, true);
    Objective obj = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
        StableParams p{z[0], std::exp(z[1]), fixed ? *opt.fixed_alpha : z[2]};
        std::array<double, 3> gr{};
        const double q = prob.value(p, &gr);
        g[0] = gr[0];
        g[1] = gr[1] * p.sigma;
        if (!fixed) g[2] = gr[2];
        return q;
    };
    const int dim = fixed ? 2 : 3;
    Eigen::VectorXd z0(dim), lo(dim), hi(dim);
    z0 << 0.0, std::log(s0), Eigen::VectorXd::Constant(dim - 2, a0);
    lo.setConstant(-INFINITY);
    hi.setConstant(INFINITY);
    if (!fixed) {
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
    rep.objective = r.value;
    rep.projected_gradient = r.projected_gradient;
    rep.iterations = r.iterations;
    rep.evaluations = r.evaluations;
    rep.converged = r.converged;
    rep.alpha_at_boundary = rep.params.alpha >= 2.0;
    if (!r.converged)
        throw ConvergenceError("eise_fit did not converge (projected gradient " +
                                   std::to_string(r.projected_gradient) + ")",
                               rep);
    return rep;
}

}  // namespace stablegof
