#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "stablegof/spectral.hpp"

using namespace stablegof;

namespace {

Discretization midpoint_rank_one(int N) {
    Discretization d;
    d.grid.resize(N);
    for (int i = 0; i < N; ++i) d.grid[i] = -1.0 + (2.0 * i + 1.0) / N;
    Eigen::VectorXd g(N);
    for (int i = 0; i < N; ++i) g[i] = 1.0 - d.grid[i] * d.grid[i];
    d.K = g * g.transpose();
    return d;
}

}  // namespace

TEST_CASE("rank-one kernel has the single eigenvalue 1 / int g^2") {
    const Spectrum s = eigen_spectrum(midpoint_rank_one(400), KernelSpec::mle_h1(1.5, 1.0));
    REQUIRE(s.lambdas.size() >= 1);
    CHECK(s.lambdas.front() == doctest::Approx(15.0 / 16.0).epsilon(1e-6));
    // Everything else is roundoff and falls under the cutoff.
    CHECK(s.lambdas.size() == 1);
    CHECK(s.discarded == 399);
}

TEST_CASE("discretization is exactly symmetric and small near u = 0") {
    const Kernel k(KernelSpec::mle_h1(1.5, 2.5));
    const int N = 200;
    const Discretization d = discretize(k, N);
    CHECK((d.K - d.K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.grid.front() == doctest::Approx(-1.0 + 1.0 / N));
    CHECK(d.grid.back() == doctest::Approx(1.0 - 1.0 / N));
    // Central nodes sit at +-1/N; K vanishes on u = 0 and is Lipschitz there.
    const double lip = d.K.cwiseAbs().maxCoeff() * 20.0;
    for (int j = 0; j < N; ++j) {
        CHECK(std::abs(d.K(N / 2 - 1, j)) < lip / N);
        CHECK(std::abs(d.K(N / 2, j)) < lip / N);
    }
    CHECK_THROWS_AS(discretize(k, 15), DomainError);
    CHECK_THROWS_AS(discretize(k, 101), DomainError);
}

TEST_CASE("matrix trace approaches the diagonal integral") {
    const Kernel k(KernelSpec::mle_h1(1.5, 2.5));
    const Spectrum s = compute_spectrum(k.spec(), 200);
    const double tr = kernel_trace(k);
    CHECK(s.matrix_trace == doctest::Approx(tr).epsilon(0.01));
    CHECK(s.mean() == doctest::Approx(tr).epsilon(0.01));
}

TEST_CASE("refinement 400 -> 800") {
    const KernelSpec spec = KernelSpec::mle_h1(1.0, 1.0);
    const Spectrum a = compute_spectrum(spec, 400), b = compute_spectrum(spec, 800);
    CHECK(std::abs(a.lambdas[0] / b.lambdas[0] - 1.0) < 0.003);
    for (int j = 0; j < 10; ++j) CHECK(std::abs(a.lambdas[j] / b.lambdas[j] - 1.0) < 0.01);
    const double tr = kernel_trace(Kernel(spec));
    CHECK(std::abs(b.mean() - tr) / tr < 0.01);
}

TEST_CASE("simple eigenvalues away from alpha = 1, pairs at alpha = 1 under H2") {
    for (double a : {1.5, 1.8}) {
        const Spectrum s = compute_spectrum(KernelSpec::mle_h1(a, 2.5), 400);
        for (int j = 0; j + 1 < 20; ++j) CHECK(s.lambdas[j + 1] - s.lambdas[j] > 1e-8 * s.lambdas[j]);
    }
    const Spectrum c = compute_spectrum(KernelSpec::mle_h2(1.0, 1.0), 400);
    for (int j = 0; j + 1 < 20; j += 2) CHECK(c.lambdas[j + 1] == doctest::Approx(c.lambdas[j]).epsilon(1e-9));
}

TEST_CASE("Fredholm determinant") {
    const Spectrum s = compute_spectrum(KernelSpec::mle_h1(1.5, 2.5), 200);
    const int m = 100;
    CHECK(fredholm_det(0.0, s, m) == 1.0);
    CHECK(fredholm_det(s.lambdas[0], s, m) == 0.0);
    // One sign change per eigenvalue crossed.
    for (int j = 0; j < 6; ++j) {
        const double mid = 0.5 * (s.lambdas[j] + s.lambdas[j + 1]);
        CHECK((fredholm_det(mid, s, m) > 0) == (j % 2 == 1));
    }
    CHECK_THROWS_AS(fredholm_det(1.0, s, static_cast<int>(s.lambdas.size()) + 1), DomainError);
}

TEST_CASE("spectrum file round trip") {
    const KernelSpec spec = KernelSpec::mle_h2(1.5, 2.5);
    const Spectrum s = compute_spectrum(spec, 64);
    const auto path = std::filesystem::temp_directory_path() / spectrum_cache_name(spec, 64);
    save_spectrum(s, path.string());
    const Spectrum r = load_spectrum(path.string());
    std::filesystem::remove(path);
    CHECK(r.N == s.N);
    CHECK(r.kernel.kind == spec.kind);
    CHECK(r.kernel.alpha == spec.alpha);
    CHECK(r.kernel.kappa == spec.kappa);
    CHECK(r.discarded == s.discarded);
    CHECK(r.matrix_trace == s.matrix_trace);
    CHECK(r.grid == s.grid);
    CHECK(r.lambdas == s.lambdas);
    CHECK(spectrum_cache_name(spec, 64) != spectrum_cache_name(spec, 128));
    CHECK_THROWS_AS(load_spectrum("/nonexistent/spectrum.spec"), Error);
}
