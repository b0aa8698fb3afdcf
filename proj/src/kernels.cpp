#include "stablegof/kernels.hpp"

#include <cmath>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace stablegof {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kEuler = boost::math::constants::euler<double>();
constexpr double kLn2 = boost::math::constants::ln_two<double>();
constexpr int kEiseGrid = 2048;

// |s|^a and |s|^a log|s|, both taken as 0 at s = 0.
struct PowLog {
    double p, pl;
    PowLog(double s, double a) {
        const double as = std::abs(s);
        if (as == 0.0) {
            p = pl = 0.0;
        } else {
            p = std::pow(as, a);
            pl = p * std::log(as);
        }
    }
};

}  // namespace

const char* kernel_kind_name(KernelKind k) {
    switch (k) {
        case KernelKind::mle_h1: return "mle_h1";
        case KernelKind::mle_h2: return "mle_h2";
        case KernelKind::cauchy_mle: return "cauchy_mle";
        case KernelKind::eise_h1: return "eise_h1";
        case KernelKind::eise_fixed: return "eise_fixed";
        case KernelKind::efficient_general: return "efficient_general";
    }
    return "unknown";
}

KernelKind parse_kernel_kind(const std::string& name) {
    for (KernelKind k : {KernelKind::mle_h1, KernelKind::mle_h2, KernelKind::cauchy_mle, KernelKind::eise_h1,
                         KernelKind::eise_fixed, KernelKind::efficient_general})
        if (name == kernel_kind_name(k)) return k;
    throw DomainError("unknown kernel kind '" + name + "'");
}

KernelSpec KernelSpec::mle_h1(double alpha, double kappa) {
    KernelSpec k;
    k.kind = KernelKind::mle_h1;
    k.alpha = alpha;
    k.kappa = kappa;
    k.fisher_inverse = (alpha == 1.0 ? cauchy_fisher_info() : fisher_info(alpha)).inverse();
    k.validate();
    return k;
}

KernelSpec KernelSpec::mle_h2(double alpha, double kappa) {
    KernelSpec k;
    k.kind = KernelKind::mle_h2;
    k.alpha = alpha;
    k.kappa = kappa;
    // With alpha known the (mu, sigma) block is inverted on its own.
    const FisherInfo fi = alpha == 2.0   ? gaussian_location_scale_info()
                          : alpha == 1.0 ? cauchy_fisher_info()
                                         : fisher_info(alpha);
    k.fisher_inverse(0, 0) = 1.0 / fi.I11;
    k.fisher_inverse(1, 1) = 1.0 / fi.I22;
    k.validate();
    return k;
}

KernelSpec KernelSpec::cauchy(double kappa) {
    KernelSpec k;
    k.kind = KernelKind::cauchy_mle;
    k.alpha = 1.0;
    k.kappa = kappa;
    k.fisher_inverse = cauchy_fisher_info().inverse();
    k.validate();
    return k;
}

KernelSpec KernelSpec::eise_h1(double alpha, double kappa, const WeightSpec& w) {
    KernelSpec k;
    k.kind = KernelKind::eise_h1;
    k.alpha = alpha;
    k.kappa = kappa;
    k.weight = w;
    k.eise = eise_matrices(alpha, w);
    k.validate();
    return k;
}

KernelSpec KernelSpec::eise_fixed(double alpha, double kappa, const WeightSpec& w) {
    KernelSpec k = eise_h1(alpha, kappa, w);
    k.kind = KernelKind::eise_fixed;
    return k;
}

void KernelSpec::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("kernel alpha must lie in (0, 2]");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
    switch (kind) {
        case KernelKind::mle_h1:
        case KernelKind::efficient_general:
            if (alpha == 2.0) throw DomainError("alpha = 2 has infinite information for alpha");
            [[fallthrough]];
        case KernelKind::mle_h2:
            if (!(fisher_inverse(0, 0) > 0.0 && fisher_inverse(1, 1) > 0.0))
                throw DomainError("kernel needs the inverse Fisher information");
            break;
        case KernelKind::cauchy_mle:
            if (alpha != 1.0) throw DomainError("Cauchy kernel requires alpha = 1");
            break;
        case KernelKind::eise_h1:
        case KernelKind::eise_fixed:
            weight.validate();
            if (!(eise.A(0, 0) > 0.0) || eise.alpha != alpha) throw DomainError("kernel needs EISE matrices at alpha");
            break;
    }
}

double gamma_mle(double s, double t, double alpha, const Eigen::Matrix3d& Ii) {
    const PowLog ps(s, alpha), pt(t, alpha);
    const double E = std::exp(-ps.p - pt.p);
    const double br = Ii(0, 0) * s * t + Ii(1, 1) * alpha * alpha * ps.p * pt.p +
                      Ii(1, 2) * alpha * (ps.p * pt.pl + ps.pl * pt.p) + Ii(2, 2) * ps.pl * pt.pl;
    return std::exp(-std::pow(std::abs(t - s), alpha)) - E - br * E;
}

double gamma_mle_fixed(double s, double t, double alpha, const Eigen::Matrix3d& Ii) {
    const PowLog ps(s, alpha), pt(t, alpha);
    const double E = std::exp(-ps.p - pt.p);
    const double br = Ii(0, 0) * s * t + Ii(1, 1) * alpha * alpha * ps.p * pt.p;
    return std::exp(-std::pow(std::abs(t - s), alpha)) - E - br * E;
}

double gamma_cauchy(double s, double t) {
    const double as = std::abs(s), at = std::abs(t);
    const double E = std::exp(-as - at);
    const double c = kEuler + kLn2 - 1.0;
    const double ls = as > 0.0 ? as * (std::log(as) + c) : 0.0;
    const double lt = at > 0.0 ? at * (std::log(at) + c) : 0.0;
    return std::exp(-std::abs(t - s)) - (1.0 + 2.0 * (s * t + as * at)) * E - 12.0 / (kPi * kPi) * ls * lt * E;
}

CfModel stable_cf_model(const StableParams& theta0) {
    theta0.validate();
    CfModel m;
    m.cf = [theta0](double t) { return cf(t, theta0); };
    m.gradient = [theta0](double t) {
        const auto g = cf_grad(t, theta0);
        Eigen::VectorXcd v(3);
        v << g[0], g[1], g[2];
        return v;
    };
    return m;
}

cplx gamma_efficient(double s, double t, const CfModel& model, const Eigen::MatrixXd& Ii) {
    const Eigen::VectorXcd gs = model.gradient(s), gt = model.gradient(t);
    const cplx quad = gs.transpose() * Ii.cast<cplx>() * gt.conjugate();
    return model.cf(s - t) - model.cf(s) * std::conj(model.cf(t)) - quad;
}

struct EiseKernel::Tables {
    std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> M;
};

EiseKernel::EiseKernel(double alpha, const EiseMatrices& m, bool fixed_alpha, double s_max)
    : alpha_(alpha), Bs_(m.Bsigma), Ba_(m.Balpha), w_(m.weight), s_max_(s_max) {
    if (m.alpha != alpha) throw DomainError("EISE matrices were computed at a different alpha");
    if (fixed_alpha) {
        Ainv_.setZero();
        J_.setZero();
        Ainv_(0, 0) = 1.0 / m.A(0, 0);
        Ainv_(1, 1) = 1.0 / m.A(1, 1);
        J_(0, 0) = m.H(0, 0) * Ainv_(0, 0) * Ainv_(0, 0);
        J_(1, 1) = m.H(1, 1) * Ainv_(1, 1) * Ainv_(1, 1);
    } else {
        Ainv_ = m.A.inverse();
        J_ = m.J;
    }
    auto tab = std::make_shared<Tables>();
    const double h = s_max_ / (kEiseGrid - 1);
    std::vector<double> v[3];
    for (auto& x : v) x.resize(kEiseGrid);
    for (int i = 0; i < kEiseGrid; ++i) {
        const auto r = inner(i * h);
        for (int c = 0; c < 3; ++c) v[c][i] = r[c];
    }
    for (int c = 0; c < 3; ++c) tab->M.emplace_back(v[c].begin(), v[c].end(), 0.0, h);
    tab_ = tab;
}

std::array<double, 3> EiseKernel::inner(double s) const {
    const double a = alpha_;
    auto f = [&](double u) -> std::array<double, 3> {
        const PowLog pu(u, a);
        const double e = std::exp(-std::pow(std::abs(s - u), a) - pu.p) * w_(u);
        return {u * e, pu.p * e, pu.pl * e};
    };
    const double U = std::min(std::pow(40.0, 1.0 / a), std::pow(40.0 / w_.kappa_or_nu, 1.0 / w_.exponent()));
    const double b[4] = {-U, std::min(0.0, s), std::max(0.0, s), U};
    std::array<double, 3> out{};
    const quad::Options opt{1e-11, 1e-15, 2000};
    for (int i = 0; i < 3; ++i) {
        const double lo = std::clamp(b[i], -U, U), hi = std::clamp(b[i + 1], -U, U);
        if (hi <= lo) continue;
        const auto r = quad::adaptive(f, lo, hi, opt);
        quad::require(r, "EISE kernel inner integral");
        for (int c = 0; c < 3; ++c) out[c] += r.value[c];
    }
    return out;
}

std::array<double, 3> EiseKernel::inner_interpolated(double s) const {
    const double as = std::abs(s);
    if (as > s_max_) return inner(s);
    std::array<double, 3> r{tab_->M[0](as), tab_->M[1](as), tab_->M[2](as)};
    if (s < 0) r[0] = -r[0];  // odd in s; the other two are even
    return r;
}

double EiseKernel::operator()(double s, double t) const {
    const double a = alpha_;
    const PowLog ps(s, a), pt(t, a);
    const double es = std::exp(-ps.p), et = std::exp(-pt.p), E = es * et;
    const Eigen::Matrix3d& Ai = Ainv_;
    double v = std::exp(-std::pow(std::abs(t - s), a)) - E;
    v += (J_(0, 0) * s * t + J_(1, 1) * a * a * ps.p * pt.p + J_(1, 2) * a * (ps.p * pt.pl + ps.pl * pt.p) +
          J_(2, 2) * ps.pl * pt.pl) *
         E;
    v += ((Bs_ * Ai(1, 1) + Ba_ * Ai(1, 2)) * a * (pt.p + ps.p) + (Bs_ * Ai(1, 2) + Ba_ * Ai(2, 2)) * (pt.pl + ps.pl)) *
         E;
    auto half = [&](double x, const PowLog& px, double ex, double y) {
        const auto M = inner_interpolated(y);
        return Ai(0, 0) * x * ex * M[0] + a * (Ai(1, 1) * a * px.p + Ai(1, 2) * px.pl) * ex * M[1] +
               (Ai(1, 2) * a * px.p + Ai(2, 2) * px.pl) * ex * M[2];
    };
    v -= half(t, pt, et, s) + half(s, ps, es, t);
    return v;
}

Kernel::Kernel(const KernelSpec& spec) : spec_(spec) {
    spec_.validate();
    if (spec_.kind == KernelKind::eise_h1 || spec_.kind == KernelKind::eise_fixed) {
        const double s_max = 2.0 * 14.0 * std::log(10.0) / spec_.kappa;
        eise_ = std::make_shared<EiseKernel>(spec_.alpha, spec_.eise, spec_.kind == KernelKind::eise_fixed, s_max);
    }
}

double Kernel::gamma(double s, double t) const {
    switch (spec_.kind) {
        case KernelKind::mle_h1: return gamma_mle(s, t, spec_.alpha, spec_.fisher_inverse);
        case KernelKind::mle_h2: return gamma_mle_fixed(s, t, spec_.alpha, spec_.fisher_inverse);
        case KernelKind::cauchy_mle: return gamma_cauchy(s, t);
        case KernelKind::eise_h1:
        case KernelKind::eise_fixed: return (*eise_)(s, t);
        case KernelKind::efficient_general: {
            const CfModel m = stable_cf_model({0.0, 1.0, spec_.alpha});
            return gamma_efficient(s, t, m, spec_.fisher_inverse).real();
        }
    }
    return 0.0;
}

double Kernel::transformed(double u, double v) const {
    if (!(std::abs(u) <= 1.0 && std::abs(v) <= 1.0)) throw DomainError("transformed kernel needs |u|, |v| <= 1");
    const double kappa = spec_.kappa;
    if (std::abs(u) == 1.0 || std::abs(v) == 1.0) {
        if (kappa > 1.0) return 0.0;
        const double inside = std::nextafter(1.0, 0.0);
        return transformed(std::clamp(u, -inside, inside), std::clamp(v, -inside, inside));
    }
    // s = -sgn(u) log(1 - |u|)
    const double s = std::copysign(std::log1p(-std::abs(u)), u);
    const double t = std::copysign(std::log1p(-std::abs(v)), v);
    const double g = gamma(s, t);
    if (kappa == 1.0) return g;
    return g * std::pow((1.0 - std::abs(u)) * (1.0 - std::abs(v)), 0.5 * (kappa - 1.0));
}

double transformed_kernel(double u, double v, const Kernel& k) { return k.transformed(u, v); }

}  // namespace stablegof
