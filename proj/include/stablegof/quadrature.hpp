#pragma once

// Globally adaptive Gauss-Kronrod (10/21) integration for scalar or
// fixed-size vector integrands. Node tables come from Boost.Math; Boost's own
// adaptive driver only handles scalars, and several integrals here need 3-4
// channels sharing one density evaluation.

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stablegof/error.hpp"

namespace stablegof::quad {

struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_intervals = 4000;
};

template <class V>
struct Result {
    V value{};
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

template <class V>
struct Ops;

template <>
struct Ops<double> {
    static double zero() { return 0.0; }
    static void axpy(double& y, double a, double x) { y += a * x; }
    static double norm(double v) { return std::abs(v); }
    static double dist(double a, double b) { return std::abs(a - b); }
};

template <std::size_t N>
struct Ops<std::array<double, N>> {
    using V = std::array<double, N>;
    static V zero() { return V{}; }
    static void axpy(V& y, double a, const V& x) {
        for (std::size_t i = 0; i < N; ++i) y[i] += a * x[i];
    }
    static double norm(const V& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    static double dist(const V& a, const V& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }
};

template <class V>
struct Segment {
    double a, b;
    V value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class V, class F>
Segment<V> gk21(F& f, double a, double b) {
    using O = Ops<V>;
    static const auto& x = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
    static const auto& wk = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
    static const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    V kron = O::zero(), gauss = O::zero();
    O::axpy(kron, wk[0], f(c));
    for (std::size_t i = 1; i < x.size(); ++i) {
        const V lo = f(c - h * x[i]);
        const V hi = f(c + h * x[i]);
        O::axpy(kron, wk[i], lo);
        O::axpy(kron, wk[i], hi);
        if (i % 2 == 1) {
            O::axpy(gauss, wg[i / 2], lo);
            O::axpy(gauss, wg[i / 2], hi);
        }
    }
    V kv = O::zero(), gv = O::zero();
    O::axpy(kv, h, kron);
    O::axpy(gv, h, gauss);
    return {a, b, kv, O::dist(kv, gv)};
}

}  // namespace detail

// Integrate f over [a,b]. Never throws; check Result::converged.
template <class F>
auto adaptive(F&& f, double a, double b, const Options& opt = {})
    -> Result<std::decay_t<std::invoke_result_t<F&, double>>> {
    using V = std::decay_t<std::invoke_result_t<F&, double>>;
    using O = detail::Ops<V>;
    Result<V> out;
    if (a == b) {
        out.value = O::zero();
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Segment<V>> heap;
    heap.push(detail::gk21<V>(f, a, b));
    int count = 1;
    for (;;) {
        V total = O::zero();
        double err = 0.0;
        {
            // Summing from scratch keeps the running total free of cancellation drift.
            auto copy = heap;
            while (!copy.empty()) {
                O::axpy(total, 1.0, copy.top().value);
                err += copy.top().error;
                copy.pop();
            }
        }
        const double target = std::max(opt.abs_tol, opt.rel_tol * O::norm(total));
        if (err <= target || count >= opt.max_intervals) {
            out.value = total;
            out.error = err;
            out.intervals = count;
            out.converged = err <= target;
            return out;
        }
        // Split the worst segments until the error budget would be met.
        int splits = std::max(1, count / 8);
        for (int s = 0; s < splits && !heap.empty() && count < opt.max_intervals; ++s) {
            auto worst = heap.top();
            if (worst.error <= 0.25 * target / count) break;
            heap.pop();
            const double mid = 0.5 * (worst.a + worst.b);
            if (!(mid > worst.a && mid < worst.b)) {
                heap.push(worst);
                out.value = total;
                out.error = err;
                out.intervals = count;
                out.converged = false;
                return out;
            }
            heap.push(detail::gk21<V>(f, worst.a, mid));
            heap.push(detail::gk21<V>(f, mid, worst.b));
            ++count;
        }
    }
}

// Integrate over [a, inf) through x = a + u/(1-u).
template <class F>
auto adaptive_to_infinity(F&& f, double a, const Options& opt = {}) {
    auto g = [&f, a](double u) {
        const double om = 1.0 - u;
        const double x = a + u / om;
        auto v = f(x);
        using V = std::decay_t<decltype(v)>;
        V r = detail::Ops<V>::zero();
        detail::Ops<V>::axpy(r, 1.0 / (om * om), v);
        return r;
    };
    return adaptive(g, 0.0, 1.0, opt);
}

template <class V>
const V& require(const Result<V>& r, const std::string& what) {
    if (!r.converged)
        throw NumericalError(what + ": quadrature did not converge (error estimate " +
                             std::to_string(r.error) + ")");
    return r.value;
}

}  // namespace stablegof::quad
