#include <cmath>

#include <boost/math/constants/constants.hpp>

#include "stablegof/estimators.hpp"

namespace stablegof {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
constexpr double kEuler = boost::math::constants::euler<double>();
constexpr double kLn2 = boost::math::constants::ln_two<double>();
}  // namespace

Eigen::Matrix3d FisherInfo::matrix() const {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    m(0, 0) = I11;
    m(1, 1) = I22;
    m(1, 2) = m(2, 1) = I23;
    m(2, 2) = I33;
    return m;
}

Eigen::Matrix3d FisherInfo::inverse() const {
    Eigen::Matrix3d inv = Eigen::Matrix3d::Zero();
    inv(0, 0) = 1.0 / I11;
    if (I33 == 0.0) {
        inv(1, 1) = 1.0 / I22;
        return inv;
    }
    const double det = I22 * I33 - I23 * I23;
    inv(1, 1) = I33 / det;
    inv(2, 2) = I22 / det;
    inv(1, 2) = inv(2, 1) = -I23 / det;
    return inv;
}

FisherInfo cauchy_fisher_info() {
    FisherInfo fi;
    fi.alpha = 1.0;
    fi.I11 = fi.I22 = 0.5;
    fi.I23 = 0.5 * (1.0 - kEuler - kLn2);
    const double c = kEuler + kLn2 - 1.0;
    fi.I33 = 0.5 * (kPi * kPi / 6.0 + c * c);
    return fi;
}

FisherInfo gaussian_location_scale_info() {
    FisherInfo fi;
    fi.alpha = 2.0;
    fi.I11 = 0.5;
    fi.I22 = 2.0;
    return fi;
}

std::array<double, 3> mle_scores(double x, const StableDensity& sd) {
    const DensityEval d = sd(x);
    const double r = d.fprime / d.f;
    return {-r, -1.0 - x * r, d.falpha / d.f};
}

std::array<double, 3> cauchy_al(double x) {
    const double q = x * x + 1.0;
    const double hmu = 2.0 * x / q;
    const double hsig = (x * x - 1.0) / q;
    const double halpha = (1.0 - x * x) / q * (0.5 * std::log(q) - 1.0 + kEuler) + hmu * std::atan(x);
    return {hmu, hsig, halpha};
}

FisherInfo fisher_info(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw DomainError("fisher_info requires 0 < alpha < 2 (I33 is infinite at alpha = 2)");
    const StableDensity sd(alpha);
    auto products = [&](double x) -> std::array<double, 4> {
        const DensityEval d = sd(x);
        if (d.f <= 0.0) return {0, 0, 0, 0};
        const double r = d.fprime / d.f;
        const double hm = -r, hs = -1.0 - x * r, ha = d.falpha / d.f;
        return {hm * hm * d.f, hs * hs * d.f, hs * ha * d.f, ha * ha * d.f};
    };
    const quad::Options opt{1e-11, 1e-15, 8000};
    const double xc = std::max(1.0, sd.crossover());
    auto core = quad::adaptive(products, 0.0, xc, opt);
    quad::require(core, "fisher_info core");

    // Tail in u = log x; integrand decays like x^-alpha log^2 x.
    const double u0 = std::log(xc);
    const double u1 = u0 + (40.0 + 2.0 * std::log(40.0 / alpha + 1.0)) / alpha;
    auto tail = quad::adaptive(
        [&](double u) {
            const double x = std::exp(u);
            auto v = products(x);
            for (double& e : v) e *= x;
            return v;
        },
        u0, u1, opt);
    quad::require(tail, "fisher_info tail");

    FisherInfo fi;
    fi.alpha = alpha;
    fi.I11 = 2.0 * (core.value[0] + tail.value[0]);
    fi.I22 = 2.0 * (core.value[1] + tail.value[1]);
    fi.I23 = 2.0 * (core.value[2] + tail.value[2]);
    fi.I33 = 2.0 * (core.value[3] + tail.value[3]);
    return fi;
}

}  // namespace stablegof
