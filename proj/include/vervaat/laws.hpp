#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace vervaat {

struct ClosedFormLaw {
    std::string name;
    double lo = 0.0, hi = 1.0;  // support
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<double(RngStream&)> sampler;  // empty when no exact sampler exists
};

// ---- kernels ---------------------------------------------------------------

enum class Kernel { heat, fp, bessel };

// Heat kernel p_t(x,y).
inline double heat_kernel(double t, double x, double y) {
    require(t > 0.0, "kernel: t must be positive");
    const double d = x - y;
    return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

// Density g_t(l) of the first hitting time of level l by Brownian motion, in t.
inline double fp_kernel(double t, double l) {
    require(t > 0.0, "kernel: t must be positive");
    const double e = l * l / (2.0 * t);
    if (e > 700.0) return 0.0;  // t^{-3/2} would overflow before the exponential underflows
    return std::abs(l) / std::sqrt(2.0 * std::numbers::pi * t * t * t) * std::exp(-e);
}

// q~_t(x,y); q~_t(x,y) y^2 dy is the BES(3) transition kernel.
inline double bessel_kernel(double t, double x, double y) {
    require(t > 0.0, "kernel: t must be positive");
    require(x >= 0.0 && y >= 0.0, "bessel kernel: levels must be nonnegative");
    const double c = 2.0 / std::sqrt(2.0 * std::numbers::pi * t * t * t);
    if (x == 0.0 || y == 0.0) {
        const double z = x + y;
        return c * std::exp(-z * z / (2.0 * t));
    }
    const double d = x - y;
    const double xy = x * y;
    // exp(-(x+y)^2/2t) = exp(-(x-y)^2/2t) exp(-2xy/t)
    return std::exp(-d * d / (2.0 * t)) * (-std::expm1(-2.0 * xy / t)) /
           (xy * std::sqrt(2.0 * std::numbers::pi * t));
}

inline double kernels(Kernel kind, double t, double x, double y) {
    switch (kind) {
        case Kernel::heat: return heat_kernel(t, x, y);
        case Kernel::fp: return fp_kernel(t, y - x);
        case Kernel::bessel: return bessel_kernel(t, x, y);
    }
    throw InvalidArgument("kernels: unknown kind");
}

// ---- first return time Z of the Vervaat bridge ----------------------------

inline double fz_pdf(double lambda, double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    return std::abs(lambda) / std::sqrt(2.0 * std::numbers::pi * t * u * u * u) *
           std::exp(-lambda * lambda * t / (2.0 * u));
}

inline double fz_cdf(double lambda, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return std::erf(std::abs(lambda) * std::sqrt(t / (2.0 * (1.0 - t))));
}

// Z = G^2 / (lambda^2 + G^2).
inline double fz_sample(double lambda, RngStream& rng) {
    const double g = rng.normal();
    return g * g / (lambda * lambda + g * g);
}

inline ClosedFormLaw fz(double lambda) {
    require(lambda < 0.0, "fz: lambda must be negative");
    return {"fz", 0.0, 1.0, [=](double t) { return fz_pdf(lambda, t); },
            [=](double t) { return fz_cdf(lambda, t); },
            [=](RngStream& r) { return fz_sample(lambda, r); }};
}

// Last exit from lambda > 0: density f_Z^{-lambda}(1-t).
inline ClosedFormLaw fz_hat(double lambda) {
    require(lambda > 0.0, "fz_hat: lambda must be positive");
    return {"fz_hat", 0.0, 1.0, [=](double t) { return fz_pdf(-lambda, 1.0 - t); },
            [=](double t) { return 1.0 - fz_cdf(-lambda, 1.0 - t); },
            [=](RngStream& r) { return 1.0 - fz_sample(-lambda, r); }};
}

inline double mean_z(double lambda) {
    require(lambda < 0.0, "mean_z: lambda must be negative");
    const double a = std::abs(lambda);
    return 1.0 - a * mills_ratio(a);
}

inline double stay_above_prob(double lambda) {
    require(lambda < 0.0, "stay_above_prob: lambda must be negative");
    return mean_z(lambda);
}

// P(last hull slope in [lambda, a]) for a in [lambda, 0].
inline double slope_cdf(double lambda, double a) {
    require(lambda < 0.0, "slope_cdf: lambda must be negative");
    require(a >= lambda && a <= 0.0, "slope_cdf: a outside [lambda, 0]");
    return 1.0 + a * mills_ratio(std::abs(lambda));
}

// Split A = U Z: pdf(a) = int_a^1 f_Z(t)/t dt. With t = v^2/(lambda^2+v^2) the
// integral is 2(1-lambda^2) Phibar(v_a) + 2 lambda^2 phi(v_a)/v_a.
inline double fa_pdf(double lambda, double a) {
    if (a <= 0.0) return a == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    if (a >= 1.0) return 0.0;
    const double l2 = lambda * lambda;
    const double v = std::abs(lambda) * std::sqrt(a / (1.0 - a));
    return 2.0 * (1.0 - l2) * normal_sf(v) + 2.0 * l2 * normal_pdf(v) / v;
}

// P(A <= a) = P(Z <= a) + a * pdf(a) (Fubini).
inline double fa_cdf(double lambda, double a) {
    if (a <= 0.0) return 0.0;
    if (a >= 1.0) return 1.0;
    return fz_cdf(lambda, a) + a * fa_pdf(lambda, a);
}

inline ClosedFormLaw fa(double lambda) {
    require(lambda < 0.0, "fa: lambda must be negative");
    return {"fa", 0.0, 1.0, [=](double a) { return fa_pdf(lambda, a); },
            [=](double a) { return fa_cdf(lambda, a); },
            [=](RngStream& r) {
                const double z = fz_sample(lambda, r);
                return r.uniform() * z;
            }};
}

// Size-biased Z: t f_Z(t) / E Z.
inline ClosedFormLaw fztilde(double lambda) {
    require(lambda < 0.0, "fztilde: lambda must be negative");
    const double m = mean_z(lambda);
    const double l = std::abs(lambda);
    auto cdf = [=](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        // E[Z; Z <= t] with Z = G^2/(l^2+G^2): integrate over |G| < v_t.
        const double vt = l * std::sqrt(t / (1.0 - t));
        const auto f = [=](double v) { return 2.0 * normal_pdf(v) * v * v / (l * l + v * v); };
        const double s = integrate_smooth(f, 0.0, std::min(vt, 40.0), {1e-12, 15});
        return std::min(1.0, s / m);
    };
    return {"fztilde", 0.0, 1.0, [=](double t) { return t * fz_pdf(lambda, t) / m; }, cdf,
            [=](RngStream& r) {
                for (;;) {
                    const double z = fz_sample(lambda, r);
                    if (r.uniform() < z) return z;
                }
            }};
}

// ---- meander and V(B) moments ---------------------------------------------

struct MeanderMoments {
    double mean, second, cross;  // E B_t, E B_t^2, E B_t B_1
};

inline MeanderMoments meander_moments(double t) {
    require(t >= 0.0 && t <= 1.0, "meander_moments: t outside [0,1]");
    const double s = std::sqrt(2.0 / std::numbers::pi);
    return {s * (std::sqrt(t * (1.0 - t)) + std::asin(std::sqrt(t))), 3.0 * t - t * t,
            2.0 * std::sqrt(t)};
}

inline double meander_pdf(double t, double x) {
    if (x <= 0.0 || std::isinf(x)) return 0.0;
    const double e = std::exp(-x * x / (2.0 * t));
    const double f = t >= 1.0 ? 1.0 : std::erf(x / std::sqrt(2.0 * (1.0 - t)));
    return std::pow(t, -1.5) * x * e * f;
}

// cdf(x) = erf(x / sqrt(2t(1-t))) - t^{-1/2} exp(-x^2/2t) erf(x / sqrt(2(1-t))).
inline double meander_cdf(double t, double x) {
    if (x <= 0.0) return 0.0;
    if (t >= 1.0) return -std::expm1(-0.5 * x * x);
    return std::erf(x / std::sqrt(2.0 * t * (1.0 - t))) -
           std::exp(-x * x / (2.0 * t)) * std::erf(x / std::sqrt(2.0 * (1.0 - t))) / std::sqrt(t);
}

inline ClosedFormLaw meander_marginal(double t) {
    require(t > 0.0 && t <= 1.0, "meander_marginal: t outside (0,1]");
    return {"meander_marginal", 0.0, std::numeric_limits<double>::infinity(),
            [=](double x) { return meander_pdf(t, x); }, [=](double x) { return meander_cdf(t, x); },
            {}};
}

struct VbMoments {
    double mean, second;
    double mean_a_gt, mean_a_le;      // E(V_t 1{A>t}), E(V_t 1{A<=t})
    double second_a_gt, second_a_le;  // same for V_t^2
};

inline VbMoments vb_moments(double t) {
    require(t >= 0.0 && t <= 1.0, "vb_moments: t outside [0,1]");
    const double pi = std::numbers::pi;
    const double st = std::sqrt(t), su = std::sqrt(1.0 - t);
    const double as = std::asin(st);
    const double r = std::sqrt(2.0 / pi);
    VbMoments m;
    m.mean = std::sqrt(8.0 / pi) * (st + su - 1.0);
    m.second = 3.0 * t + (4.0 - 8.0 * t) / pi * as - 4.0 / pi * st * su;
    m.mean_a_gt = r * (su + 2.0 * st - t - 1.0);
    m.mean_a_le = r * (su + t - 1.0);
    m.second_a_gt = 3.0 * t - 6.0 * t / pi * as - 2.0 / pi * t * st * su;
    m.second_a_le = (4.0 - 2.0 * t) / pi * (as - st * su);
    return m;
}

// V(B)_1 given T0 = t0: negative half-Rayleigh with scale 1 - t0.
inline ClosedFormLaw end_given_t0(double t0) {
    require(t0 > 0.0 && t0 < 1.0, "end_given_t0: t0 outside (0,1)");
    const double s = 1.0 - t0;
    return {"end_given_t0", -std::numeric_limits<double>::infinity(), 0.0,
            [=](double l) { return l < 0.0 ? -l / s * std::exp(-l * l / (2.0 * s)) : 0.0; },
            [=](double l) { return l < 0.0 ? std::exp(-l * l / (2.0 * s)) : 1.0; },
            [=](RngStream& r) { return -std::sqrt(-2.0 * s * std::log(r.uniform())); }};
}

// BES(3) marginals.
inline double bessel3_cdf(double t, double y) {
    if (y <= 0.0) return 0.0;
    return std::erf(y / std::sqrt(2.0 * t)) - std::sqrt(2.0 / (std::numbers::pi * t)) * y * std::exp(-y * y / (2.0 * t));
}

inline double bessel3_bridge_pdf(double T, double a, double b, double t, double y) {
    if (y <= 0.0) return 0.0;
    return bessel_kernel(t, a, y) * y * y * bessel_kernel(T - t, y, b) / bessel_kernel(T, a, b);
}

// ---- non-Markov densities of the return time after t0 ----------------------

// f1: given V_{t0/2} = 0 and V_{t0} = x0; f2: given no zero before t0 and V_{t0} = x0.
class NonMarkovDensities {
public:
    NonMarkovDensities(double t0, double x0, double lambda) : t0_(t0), x0_(x0), l_(lambda) {
        require(t0 > 0.0 && t0 < 1.0, "nonmarkov: t0 outside (0,1)");
        require(x0 > 0.0, "nonmarkov: x0 must be positive");
        require(lambda < 0.0, "nonmarkov: lambda must be negative");
        c1_ = integrate([&](double t) { return raw1(t); }, t0, 1.0, {1e-12, 15});
        c2_ = integrate([&](double t) { return raw2(t); }, t0, 1.0, {1e-12, 15});
    }

    double raw1(double t) const {
        if (t <= t0_ || t >= 1.0) return 0.0;
        return fp_kernel(t - t0_, x0_) * fp_kernel(1.0 - t, l_) / fp_kernel(1.0 - t0_, x0_ - l_);
    }
    double raw2(double t) const {
        if (t <= t0_ || t >= 1.0) return 0.0;
        return bessel_kernel(t0_, 0.0, x0_) * bessel_kernel(t - t0_, x0_, 0.0) / bessel_kernel(t, 0.0, 0.0) *
               x0_ * x0_ * fz_pdf(l_, t);
    }
    double f1(double t) const { return raw1(t) / c1_; }
    double f2(double t) const { return raw2(t) / c2_; }
    double ratio(double t) const {
        require(t > t0_ && t < 1.0, "nonmarkov_ratio: t outside (t0,1)");
        return f2(t) / f1(t);
    }
    double norm1() const { return c1_; }

private:
    double t0_, x0_, l_;
    double c1_ = 1.0, c2_ = 1.0;
};

inline double nonmarkov_ratio(double t, double t0, double x0, double lambda) {
    return NonMarkovDensities(t0, x0, lambda).ratio(t);
}

// ---- closed-form integral identities ----------------------------------------

inline double identity_52(double a) {
    return (std::sqrt(a) + (a + 1.0) * std::asin(std::sqrt(1.0 / (a + 1.0)))) /
           (2.0 * std::sqrt(std::numbers::pi) * std::pow(a, 1.5) * (a + 1.0));
}

inline double identity_54(double a) { return (2.0 + 3.0 * a) / (4.0 * a * a * std::pow(a + 1.0, 1.5)); }

// int_t^1 ds / sqrt((1-s)(s-t)) exp(-a/(s-t)) = pi erfc(sqrt(a/(1-t))).
inline double erfc_kernel_rhs(double t, double a) { return std::numbers::pi * std::erfc(std::sqrt(a / (1.0 - t))); }

inline std::vector<TestReport> identity_checks(double tol = 1e-6) {
    std::vector<TestReport> out;
    const Quadrature q{1e-12, 15};
    for (double t : {0.1, 0.5, 0.9})
        for (double a : {0.0, 0.1, 0.5, 2.0}) {
            // s = t + (1-t) sin^2(u) removes both endpoint singularities.
            const double lhs = integrate(
                [=](double u) {
                    const double w = std::sin(u), d = (1.0 - t) * w * w;
                    if (a == 0.0) return 2.0;
                    return d > 0.0 ? 2.0 * std::exp(-a / d) : 0.0;
                },
                0.0, std::numbers::pi / 2, q);
            out.push_back(tolerance_check("erfc kernel identity t=" + num(t) + " a=" + num(a), lhs, erfc_kernel_rhs(t, a), tol, true));
        }
    for (double a : {0.5, 1.0, 2.0}) {
        const double i52 = integrate_to_inf([=](double x) { return x > 60.0 ? 0.0 : x * x * std::exp(-a * x * x) * std::erf(x); }, 0.0, q);
        const double i54 = integrate_to_inf([=](double x) { return x > 60.0 ? 0.0 : x * x * x * std::exp(-a * x * x) * std::erf(x); }, 0.0, q);
        out.push_back(tolerance_check("x^2 exp(-ax^2) erf(x) a=" + num(a), i52, identity_52(a), tol, true));
        out.push_back(tolerance_check("x^3 exp(-ax^2) erf(x) a=" + num(a), i54, identity_54(a), tol, true));
    }
    return out;
}

}  // namespace vervaat
