#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "stablegof/inversion.hpp"
#include "stablegof/montecarlo.hpp"

using namespace stablegof;

namespace {

ExperimentConfig small(std::uint64_t seed) {
    ExperimentConfig c;
    c.n = 40;
    c.alpha = 1.5;
    c.kappas = {1.0, 2.5};
    c.replications = 100;
    c.seed = seed;
    return c;
}

double asymptotic(const KernelSpec& spec, double xi) {
    const auto s = std::make_shared<Spectrum>(compute_spectrum(spec, 800));
    return quantile_dk(xi, InversionConfig::defaults(s));
}

}  // namespace

TEST_CASE("replications are reproducible and thread-count independent") {
    ExperimentConfig c = small(42);
    c.threads = 1;
    const ReplicationSet a = run_replications(c);
    c.threads = 3;
    const ReplicationSet b = run_replications(c);
    CHECK(a.statistics == b.statistics);
    CHECK(a.alpha_hat == b.alpha_hat);
    const ReplicationSet d = run_replications(small(43));
    CHECK(a.statistics != d.statistics);
    const auto s1 = simulate_critical(small(42)), s2 = simulate_critical(small(42));
    CHECK(s1.cells[0].quantiles[0].value == s2.cells[0].quantiles[0].value);
    CHECK(s1.cells[1].quantiles[1].se == s2.cells[1].quantiles[1].se);
}

TEST_CASE("empirical quantile and its binomial standard error") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    const QuantileEstimate q = empirical_quantile(v, 0.10);
    CHECK(q.value == 900.0);
    // ranks 900 +- sqrt(1000 * 0.9 * 0.1) = 900 +- 9.49
    CHECK(q.se == doctest::Approx(0.5 * (909.0 - 891.0)));
    CHECK(empirical_quantile(v, 0.05).value == 950.0);
    CHECK_THROWS_AS(empirical_quantile({}, 0.1), DomainError);
    CHECK_THROWS_AS(empirical_quantile(v, 1.0), DomainError);
}

TEST_CASE("configuration validation") {
    ExperimentConfig c = small(1);
    c.replications = 99;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = small(1);
    c.n = 19;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = small(1);
    c.kappas = {};
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = small(1);
    c.alternative = Alternative::student_t(3);
    CHECK_THROWS_AS(simulate_critical(c), DomainError);
    CHECK_THROWS_AS(power_study(small(1), {}), DomainError);
    CHECK_THROWS_AS(power_study(small(1), {{5.0, 0.1, 1.0}}), DomainError);
}

TEST_CASE("alternatives") {
    CHECK(Alternative::parse("t(3)").kind == Alternative::Kind::student_t);
    CHECK(Alternative::parse("t(3)").param == 3.0);
    CHECK(Alternative::parse("normal:2").param == 2.0);
    CHECK(std::isinf(Alternative::parse("t(inf)").param));
    CHECK(Alternative::parse("stable(1.5)").describe() == "stable(1.5)");
    CHECK_THROWS_AS(Alternative::parse("gamma(2)"), DomainError);
    CHECK_THROWS_AS(Alternative::parse("t(x)"), DomainError);
    CHECK_THROWS_AS(Alternative::parse("stable(2.5)"), DomainError);
    UniformSource u(9);
    const Alternative n2 = Alternative::normal(2.0);
    double ss = 0.0;
    const int R = 20000;
    for (int i = 0; i < R; ++i) {
        const double v = n2.draw(u);
        ss += v * v;
    }
    CHECK(ss / R == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("size under the null and power against Cauchy data") {
    const double crit = asymptotic(KernelSpec::mle_h2(1.5, 2.5), 0.10);
    ExperimentConfig c;
    c.n = 100;
    c.alpha = 1.5;
    c.kappas = {2.5};
    c.hypothesis = Hypothesis::H2;
    c.replications = 400;
    c.seed = 2024;
    const PowerStudy size = power_study(c, {{2.5, 0.10, crit}});
    const double se = std::sqrt(0.1 * 0.9 / c.replications);
    CHECK(std::abs(size.cells[0].power - 0.10) < 3.0 * se);
    CHECK(size.cells[0].se == doctest::Approx(std::sqrt(size.cells[0].power * (1 - size.cells[0].power) / 400)));
    c.alternative = Alternative::student_t(1.0);
    const PowerStudy pw = power_study(c, {{2.5, 0.10, crit}});
    CHECK(pw.cells[0].power > 0.8);
}

TEST_CASE("H1 decision rules") {
    // Table 1, kappa = 10, 10% column.
    CriticalCurve c;
    c.kappa = 10.0;
    c.xi = 0.10;
    c.alpha = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    c.value = {0.083189, 0.070175, 0.058531, 0.048287, 0.039422, 0.031846};
    const double low = 0.01;
    for (H1Method m : {H1Method::sup_all, H1Method::sup_range, H1Method::plugin})
        CHECK_FALSE(h1_decision(low, m, c, 0.75, 0.6, 0.9).reject);
    CHECK(h1_decision(0.05, H1Method::sup_all, c).threshold == 0.083189);
    CHECK(h1_decision(0.05, H1Method::plugin, c, 0.8).threshold == 0.048287);
    CHECK(h1_decision(0.05, H1Method::plugin, c, 0.8).reject);
    CHECK(h1_decision(0.05, H1Method::plugin, c, 0.85).threshold == doctest::Approx(0.5 * (0.048287 + 0.039422)));
    CHECK(h1_decision(0.05, H1Method::sup_range, c, 0.0, 0.65, 0.95).threshold ==
          doctest::Approx(0.5 * (0.070175 + 0.058531)));
    CHECK_THROWS_AS(h1_decision(0.05, H1Method::plugin, c, 1.4), DomainError);
    CHECK_THROWS_AS(h1_decision(0.05, H1Method::sup_range, c, 0.0, 1.5, 1.8), DomainError);
}
