#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>

#include "stablegof/estimators.hpp"
#include "stablegof/inversion.hpp"
#include "stablegof/kernels.hpp"
#include "stablegof/montecarlo.hpp"
#include "stablegof/spectral.hpp"

using namespace stablegof;

namespace {

constexpr int kNodes = 800;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Row {
    double alpha, kappa, q10, q05;
};

// Upper 10% and 5% points of the limiting law, H1 with estimated alpha.
const std::vector<Row> kH1 = {
    {1.0, 1.0, 0.988, 1.130},     {1.0, 2.5, 0.2395, 0.2804},    {1.0, 5.0, 0.08923, 0.10765},
    {1.0, 10.0, 0.031846, 0.039574}, {1.5, 1.0, 0.933, 1.122},  {1.5, 2.5, 0.1108, 0.1361},
    {1.5, 5.0, 0.02615, 0.03280}, {1.5, 10.0, 0.008650, 0.011180}, {1.8, 1.0, 1.037, 1.273},
    {1.8, 2.5, 0.0963, 0.1240},   {1.8, 5.0, 0.00977, 0.01257},   {1.8, 10.0, 0.002283, 0.002984},
};

// Same, alpha fixed.
const std::vector<Row> kH2 = {
    {1.0, 1.0, 1.111, 1.276},     {1.0, 2.5, 0.2862, 0.3356},  {1.0, 5.0, 0.11445, 0.13742},
    {1.0, 10.0, 0.04307, 0.05273}, {1.5, 1.0, 1.044, 1.249},  {1.5, 2.5, 0.1404, 0.1697},
    {1.5, 5.0, 0.03721, 0.04578}, {1.5, 10.0, 0.01211, 0.01514}, {1.8, 1.0, 1.110, 1.357},
    {1.8, 2.5, 0.1111, 0.1398},   {1.8, 5.0, 0.01354, 0.01679}, {1.8, 10.0, 0.00329, 0.00416},
    {2.0, 1.0, 1.216, 1.499},     {2.0, 2.5, 0.1258, 0.1622},  {2.0, 5.0, 0.00881, 0.01177},
    {2.0, 10.0, 0.000241, 0.000335},
};

// Simulated upper 10% points of D_{200,kappa}, H1.
const std::map<std::pair<double, double>, double> kFinite = {
    {{1.8, 1.0}, 1.029}, {{1.8, 2.5}, 0.1003}, {{1.5, 1.0}, 0.929},
    {{1.5, 2.5}, 0.1145}, {{1.0, 1.0}, 1.006}, {{1.0, 2.5}, 0.2462},
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

std::shared_ptr<const Spectrum> spectrum(const KernelSpec& spec) {
    return std::make_shared<Spectrum>(compute_spectrum(spec, kNodes));
}

Outcome fisher_cauchy() {
    const double g = boost::math::constants::euler<double>();
    const double l2 = boost::math::constants::ln_two<double>();
    const double pi2 = boost::math::constants::pi_sqr<double>();
    const FisherInfo fi = fisher_info(1.0);
    const double ref23 = 0.5 * (1.0 - g - l2);
    const double ref33 = 0.5 * (pi2 / 6.0 + (g + l2 - 1.0) * (g + l2 - 1.0));
    const double err = std::max({std::abs(fi.I11 - 0.5), std::abs(fi.I22 - 0.5), std::abs(fi.I23 - ref23),
                                 std::abs(fi.I33 - ref33)});
    return {err < 1e-6, "max abs error " + fmt(err, 3)};
}

Outcome fisher_15() {
    const FisherInfo fi = fisher_info(1.5);
    const double err = std::max({std::abs(fi.I11 - 0.4281), std::abs(fi.I22 - 0.9556), std::abs(fi.I33 - 0.4737),
                                 std::abs(fi.I23 + 0.2174)});
    return {err < 5e-5,
            "I11 " + fmt(fi.I11, 5) + " I22 " + fmt(fi.I22, 5) + " I33 " + fmt(fi.I33, 5) + " I23 " + fmt(fi.I23, 5)};
}

// Every cell's spectrum, shared by the critical-value and trace criteria.
std::map<std::string, std::shared_ptr<const Spectrum>>& spectra() {
    static std::map<std::string, std::shared_ptr<const Spectrum>> m;
    return m;
}

std::string key(bool h2, double a, double k) { return (h2 ? "H2/" : "H1/") + fmt(a) + "/" + fmt(k); }

std::shared_ptr<const Spectrum> cell(bool h2, double a, double k) {
    auto& m = spectra();
    const std::string id = key(h2, a, k);
    if (!m.count(id)) m[id] = spectrum(h2 ? KernelSpec::mle_h2(a, k) : KernelSpec::mle_h1(a, k));
    return m[id];
}

Outcome critical(bool h2) {
    const auto& rows = h2 ? kH2 : kH1;
    double worst = 0.0;
    std::string where;
    int bad = 0;
    for (const Row& r : rows) {
        const InversionConfig c = InversionConfig::defaults(cell(h2, r.alpha, r.kappa));
        for (auto [xi, ref] : {std::pair{0.10, r.q10}, std::pair{0.05, r.q05}}) {
            const double rel = std::abs(quantile_dk(xi, c) / ref - 1.0);
            if (rel >= 0.02) ++bad;
            if (rel > worst) {
                worst = rel;
                where = "alpha " + fmt(r.alpha) + " kappa " + fmt(r.kappa) + " xi " + fmt(xi);
            }
        }
    }
    return {bad == 0, std::to_string(2 * rows.size()) + " cells, worst rel " + fmt(worst, 3) + " at " + where};
}

Outcome cauchy_kernel() {
    const Eigen::Matrix3d Ii = cauchy_fisher_info().inverse();
    std::mt19937_64 g(20240501);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double s = d(g), t = d(g);
        worst = std::max(worst, std::abs(gamma_mle(s, t, 1.0, Ii) - gamma_cauchy(s, t)));
    }
    return {worst < 1e-10, "max abs diff " + fmt(worst, 3) + " on 10000 pairs"};
}

Outcome efficient_kernel() {
    std::mt19937_64 g(20240502);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    double worst = 0.0;
    for (double a : {1.0, 1.5}) {
        const CfModel m = stable_cf_model({0.0, 1.0, a});
        const Eigen::Matrix3d Ii = fisher_info(a).inverse();
        for (int i = 0; i < 2000; ++i) {
            const double s = d(g), t = d(g);
            worst = std::max(worst, std::abs(gamma_efficient(s, t, m, Ii) - cplx(gamma_mle(s, t, a, Ii), 0.0)));
        }
    }
    return {worst < 1e-10, "max abs diff " + fmt(worst, 3) + " on 4000 pairs"};
}

Outcome trace_identity() {
    double worst = 0.0;
    std::string where;
    int bad = 0, n = 0;
    for (bool h2 : {false, true})
        for (const Row& r : h2 ? kH2 : kH1) {
            const auto s = cell(h2, r.alpha, r.kappa);
            const double tr = kernel_trace(Kernel(s->kernel));
            const double rel = std::abs(s->mean() / tr - 1.0);
            ++n;
            if (rel >= 0.01) ++bad;
            if (rel > worst) {
                worst = rel;
                where = key(h2, r.alpha, r.kappa);
            }
        }
    return {bad == 0, std::to_string(n) + " cells, worst rel " + fmt(worst, 3) + " at " + where};
}

Outcome finite_sample() {
    int bad = 0;
    std::string detail;
    for (double a : {1.0, 1.5, 1.8}) {
        ExperimentConfig c;
        c.n = 200;
        c.alpha = a;
        c.kappas = {1.0, 2.5};
        c.replications = 2000;
        c.seed = 1;
        const CriticalStudy s = simulate_critical(c, {0.10});
        for (const CriticalCell& cc : s.cells) {
            const QuantileEstimate q = cc.quantiles.front();
            const double sim = kFinite.at({a, cc.kappa});
            const double asym = std::find_if(kH1.begin(), kH1.end(), [&](const Row& r) {
                                    return r.alpha == a && r.kappa == cc.kappa;
                                })->q10;
            const double z = std::abs(q.value - sim) / q.se;
            const double rel = std::abs(q.value / asym - 1.0);
            const bool ok = z <= 3.0 && rel <= 0.05;
            if (!ok) ++bad;
            detail += " a" + fmt(a) + "/k" + fmt(cc.kappa) + "=" + fmt(q.value, 4) + "(z " + fmt(z, 2) + ", rel " +
                      fmt(rel, 2) + (ok ? ")" : ")!");
        }
    }
    return {bad == 0, detail.substr(1)};
}

Outcome power() {
    const InversionConfig c = InversionConfig::defaults(spectrum(KernelSpec::mle_h2(1.5, 2.5)));
    const double crit = quantile_dk(0.10, c);
    ExperimentConfig e;
    e.n = 100;
    e.alpha = 1.5;
    e.kappas = {2.5};
    e.hypothesis = Hypothesis::H2;
    e.replications = 1000;
    e.seed = 1;
    bool ok = true;
    std::string detail = "critical " + fmt(crit, 5);
    for (auto [dof, target] : {std::pair{1.0, 0.93}, std::pair{3.0, 0.10}}) {
        e.alternative = Alternative::student_t(dof);
        const double p = power_study(e, {{2.5, 0.10, crit}}).cells.front().power;
        const double se = std::sqrt(target * (1.0 - target) / e.replications);
        const double z = std::abs(p - target) / se;
        ok = ok && z <= 3.0;
        detail += ", t(" + fmt(dof) + ") " + fmt(p, 3) + " vs " + fmt(target) + " (z " + fmt(z, 2) + ")";
    }
    return {ok, detail};
}

Outcome property_suites() {
    const char* suites[] = {"test_stable",  "test_estimators", "test_kernels",    "test_spectral",
                            "test_inversion", "test_ecf",      "test_montecarlo", "test_cli"};
    std::string failed;
    for (const char* s : suites) {
        const std::string cmd = std::string(STABLEGOF_TEST_DIR) + "/" + s + " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) failed += std::string(" ") + s;
    }
    return {failed.empty(), failed.empty() ? "8 suites green" : "failed:" + failed};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"Fisher information closed forms at alpha = 1", fisher_cauchy},
        {"Fisher information at alpha = 1.5", fisher_15},
        {"H1 asymptotic critical values within 2%", [] { return critical(false); }},
        {"H2 asymptotic critical values within 2%", [] { return critical(true); }},
        {"Cauchy kernel closed form", cauchy_kernel},
        {"efficient kernel reduces to the MLE kernel", efficient_kernel},
        {"trace identity within 1%", trace_identity},
        {"finite-sample 10% points, n = 200, 2000 reps", finite_sample},
        {"power under H2, n = 100, kappa = 2.5, 1000 reps", power},
        {"property suites", property_suites},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
