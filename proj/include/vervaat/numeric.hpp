#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "error.hpp"

namespace vervaat {

inline constexpr double kSqrt2Pi = 2.5066282746310002;  // sqrt(2 pi)

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// exp(x^2/2) * int_x^inf exp(-t^2/2) dt for x >= 0.
inline double mills_ratio(double x) {
    require(x >= 0.0, "mills_ratio: x must be nonnegative");
    if (x < 25.0) return std::sqrt(std::numbers::pi / 2.0) * std::exp(0.5 * x * x) * std::erfc(x / std::numbers::sqrt2);
    // Laplace continued fraction 1/(x+1/(x+2/(x+3/(x+...)))).
    double f = x;
    for (int k = 60; k >= 1; --k) f = x + k / f;
    return 1.0 / f;
}

// erf(b) - erf(a) for 0 <= a <= b without cancellation.
inline double erf_diff(double a, double b) {
    if (b - a < 0.5) {
        // Short interval: integrate 2/sqrt(pi) exp(-x^2) directly.
        const auto f = [](double x) { return std::exp(-x * x); };
        return 2.0 / std::sqrt(std::numbers::pi) *
               boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
    }
    if (a > 1.0) return std::erfc(a) - std::erfc(b);
    return std::erf(b) - std::erf(a);
}

struct Quadrature {
    double rel_tol = 1e-8;
    std::size_t max_levels = 15;
};

inline void check_quadrature(double value, double err, double tol, const char* who) {
    if (!std::isfinite(value) || !(err <= std::max(tol * std::abs(value), 1e-300) * 1e3))
        throw NumericError(std::string(who) + ": quadrature did not converge (value=" +
                           std::to_string(value) + ", err=" + std::to_string(err) + ")");
}

// Finite interval, endpoint singularities allowed.
template <class F>
double integrate(F f, double a, double b, Quadrature q = {}) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts(q.max_levels);
    double err = 0.0, l1 = 0.0;
    const double v = ts.integrate(f, a, b, q.rel_tol, &err, &l1);
    check_quadrature(v, err, q.rel_tol, "integrate");
    return v;
}

// [a, inf).
template <class F>
double integrate_to_inf(F f, double a, Quadrature q = {}) {
    boost::math::quadrature::exp_sinh<double> es(q.max_levels);
    double err = 0.0, l1 = 0.0;
    const double v = es.integrate(f, a, std::numeric_limits<double>::infinity(), q.rel_tol, &err, &l1);
    check_quadrature(v, err, q.rel_tol, "integrate_to_inf");
    return v;
}

// Smooth integrands, adaptive Gauss-Kronrod.
template <class F>
double integrate_smooth(F f, double a, double b, Quadrature q = {}) {
    if (a == b) return 0.0;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, q.rel_tol, &err);
    check_quadrature(v, err, q.rel_tol, "integrate_smooth");
    return v;
}

}  // namespace vervaat
