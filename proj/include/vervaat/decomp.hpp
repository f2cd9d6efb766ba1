#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "error.hpp"
#include "grid_path.hpp"
#include "laws.hpp"
#include "rng.hpp"
#include "sampler.hpp"
#include "transform.hpp"

namespace vervaat {

struct DecompSample {
    GridPath path;
    double z = std::numeric_limits<double>::quiet_NaN();  // Z, Zhat or first return
    double a = std::numeric_limits<double>::quiet_NaN();  // split A
    std::optional<std::size_t> hit_index;                  // measured grid first hit of 0
    std::size_t split_index = 0;                           // grid argmin tau (direct samplers)
    int branch = 0;
    std::size_t attempts = 1;
};

namespace detail {

// Grid times falling in [lo, hi] relative to lo, and their indices.
struct Piece {
    std::vector<double> times;
    std::vector<std::size_t> index;
};

inline Piece times_in(std::size_t N, double lo, double hi, bool include_lo) {
    Piece p;
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = double(i) / double(N);
        if ((include_lo ? t >= lo : t > lo) && t <= hi) {
            p.times.push_back(t - lo);
            p.index.push_back(i);
        }
    }
    return p;
}

}  // namespace detail

// Excursion of length Z followed by a first passage bridge to lambda, both
// drawn exactly at the grid times they cover.
inline DecompSample build_vervaat_bridge_neg(double lambda, std::size_t N, RngStream& rng) {
    require(lambda < 0.0, "build_vervaat_bridge_neg: lambda must be negative");
    check_grid(N, 1.0);
    const double z = fz_sample(lambda, rng);
    std::vector<double> v(N + 1, 0.0);
    const auto p1 = detail::times_in(N, 0.0, z, true);
    const auto e = bessel3_bridge_at(p1.times, z, 0.0, 0.0, rng);
    for (std::size_t k = 0; k < e.size(); ++k) v[p1.index[k]] = e[k];
    const auto p2 = detail::times_in(N, z, 1.0, false);
    const auto f = fp_bridge_at(p2.times, 1.0 - z, lambda, rng);
    for (std::size_t k = 0; k < f.size(); ++k) v[p2.index[k]] = f[k];
    v[0] = 0.0;
    v[N] = lambda;
    DecompSample s;
    s.path = GridPath(1.0, std::move(v));
    s.z = z;
    return s;
}

// BES(3) bridge 0 -> lambda of length Zhat, then lambda + excursion.
inline DecompSample build_vervaat_bridge_pos(double lambda, std::size_t N, RngStream& rng) {
    require(lambda > 0.0, "build_vervaat_bridge_pos: lambda must be positive");
    check_grid(N, 1.0);
    const double zh = 1.0 - fz_sample(-lambda, rng);
    std::vector<double> v(N + 1, 0.0);
    const auto p1 = detail::times_in(N, 0.0, zh, true);
    const auto b = bessel3_bridge_at(p1.times, zh, 0.0, lambda, rng);
    for (std::size_t k = 0; k < b.size(); ++k) v[p1.index[k]] = b[k];
    const auto p2 = detail::times_in(N, zh, 1.0, false);
    const auto e = bessel3_bridge_at(p2.times, 1.0 - zh, 0.0, 0.0, rng);
    for (std::size_t k = 0; k < e.size(); ++k) v[p2.index[k]] = lambda + e[k];
    v[0] = 0.0;
    v[N] = lambda;
    DecompSample s;
    s.path = GridPath(1.0, std::move(v));
    s.z = zh;
    return s;
}

struct DirectOptions {
    bool refine_minimum = true;  // sub-grid minimum (see vervaat_refined)
};

inline DecompSample direct_from(const GridPath& base, RngStream& rng, DirectOptions opt) {
    const auto tr = opt.refine_minimum ? vervaat_refined(base, rng) : vervaat(base);
    DecompSample s;
    s.path = tr.path;
    s.split_index = tr.argmin_index;
    s.a = tr.split_time;
    s.hit_index = first_hit(s.path, 0.0, 0);
    if (s.hit_index) s.z = s.path.time(*s.hit_index);
    return s;
}

inline DecompSample direct_vervaat_bridge(double lambda, std::size_t N, RngStream& rng,
                                          DirectOptions opt = {}) {
    require(lambda != 0.0, "direct_vervaat_bridge: lambda must be nonzero");
    const auto b = sample_bridge(N, 1.0, lambda, rng);
    return direct_from(b, rng, opt);
}

// V(B) from two independent meanders around an arcsine split A:
//   V_t = m1(t)                        for t <= A   (m1 of length A)
//   V_t = m1(A) + m2(1-t) - m2(1-A)    for t >= A   (m2 of length 1-A)
// The first piece is the post-minimum path B_{1-A+t} - B_{1-A}. After the wrap
// V_t = B_{t-A} + B_1 - B_{1-A}, with B_{t-A} - B_{1-A} = m2(1-t) and
// B_1 = m1(A) - m2(1-A).
inline DecompSample build_vb(std::size_t N, RngStream& rng) {
    check_grid(N, 1.0);
    const double s = std::sin(0.5 * std::numbers::pi * rng.uniform());
    const double A = std::clamp(s * s, 1e-300, 1.0 - 1e-16);
    std::vector<double> t1, t2;
    std::vector<std::size_t> i1, i2;
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = double(i) / double(N);
        if (t <= A) {
            t1.push_back(t);
            i1.push_back(i);
        }
    }
    t1.push_back(A);
    // m2 at times 1 - t for t > A, ascending, then at 1 - A.
    for (std::size_t i = N + 1; i-- > 0;) {
        const double t = double(i) / double(N);
        if (t > A) {
            t2.push_back(1.0 - t);
            i2.push_back(i);
        }
    }
    t2.push_back(1.0 - A);
    const auto m1 = meander_at(t1, A, rng);
    const auto m2 = meander_at(t2, 1.0 - A, rng);
    std::vector<double> v(N + 1);
    for (std::size_t k = 0; k < i1.size(); ++k) v[i1[k]] = m1[k];
    const double m1A = m1.back(), m2end = m2.back();
    for (std::size_t k = 0; k < i2.size(); ++k) v[i2[k]] = m1A + m2[k] - m2end;
    v[0] = 0.0;
    DecompSample out;
    out.path = GridPath(1.0, std::move(v));
    out.a = A;
    out.hit_index = first_hit(out.path, 0.0, 0);
    if (out.hit_index) out.z = out.path.time(*out.hit_index);
    out.branch = out.path.back() <= 0.0 ? 1 : 0;
    return out;
}

inline DecompSample direct_vb(std::size_t N, RngStream& rng, DirectOptions opt = {}) {
    const auto b = sample_bm(N, 1.0, rng);
    auto s = direct_from(b, rng, opt);
    s.branch = s.path.back() <= 0.0 ? 1 : 0;
    return s;
}

// Strictly above the line t -> c + m t at interior grid points.
inline bool above_line(const GridPath& p, double slope, double intercept = 0.0) {
    for (std::size_t i = 1; i < p.steps(); ++i)
        if (!(p.values[i] > intercept + slope * p.time(i))) return false;
    return true;
}

// P(BES(3) bridge x0 -> x1 over dt stays above a linear boundary running from
// l0 to l1, 0 <= l <= x). The BES(3) bridge is the Brownian bridge conditioned
// not to reach 0, and any path reaching 0 crosses the boundary first, so the
// crossing probability is (P_bb(boundary) - P_bb(0)) / (1 - P_bb(0)).
inline double bessel3_bridge_stays_above(double x0, double x1, double l0, double l1, double dt) {
    const double d0 = x0 - l0, d1 = x1 - l1;
    if (d0 <= 0.0 || (d1 < 0.0) || (d1 == 0.0 && x1 > 0.0)) return 0.0;
    if (x1 == 0.0) return l1 > 0.0 ? 0.0 : 1.0 - l0 / x0;  // limit x1 -> 0 with d1 = x1
    const double A = 2.0 * x0 * x1 / dt, B = 2.0 * d0 * d1 / dt;
    const double q = std::exp(-B) * -std::expm1(-(A - B)) / -std::expm1(-A);
    return std::clamp(1.0 - q, 0.0, 1.0);
}

// P(the continuous path stays strictly above t -> intercept + slope t on (0,1)
// | grid values and Z) for a sample of build_vervaat_bridge_neg. The line must
// lie at or below 0 on [0, Z], where the excursion cannot reach it. After Z the
// path is lambda + a BES(3) bridge |lambda| -> 0, pinned at the grid values.
inline double stay_above_line_probability(const DecompSample& s, double lambda, double slope,
                                          double intercept = 0.0) {
    require(lambda < 0.0, "stay_above_line_probability: lambda must be negative");
    require(std::isfinite(s.z) && s.z >= 0.0 && s.z <= 1.0,
            "stay_above_line_probability: sample has no latent Z");
    require(intercept <= 0.0 && intercept + slope * s.z <= 0.0,
            "stay_above_line_probability: line must not exceed 0 before Z");
    const auto& p = s.path;
    const std::size_t N = p.steps();
    for (std::size_t i = 1; i < N; ++i)
        if (!(p.values[i] > intercept + slope * p.time(i))) return 0.0;
    // Points of the second piece in shifted coordinates X = V - lambda.
    double t_prev = s.z, x_prev = -lambda, l_prev = intercept + slope * s.z - lambda;
    double w = 1.0;
    for (std::size_t i = 0; i <= N && w > 0.0; ++i) {
        const double t = p.time(i);
        if (t <= s.z) continue;
        const double x = i == N ? 0.0 : p.values[i] - lambda;
        const double l = intercept + slope * t - lambda;
        if (l_prev < 0.0 || l < -1e-12) return 0.0;
        w *= bessel3_bridge_stays_above(x_prev, x, l_prev, std::max(l, 0.0), t - t_prev);
        t_prev = t;
        x_prev = x;
        l_prev = std::max(l, 0.0);
    }
    return w;
}

struct ConditionOptions {
    std::size_t max_attempts = 100000;
    // Accept with the conditional probability of staying above the line given
    // the grid values; false accepts on the grid check alone.
    bool continuous = true;
};

// Vervaat bridge with lambda < 0 conditioned to stay above t -> lambda t, by
// rejection from the decomposition sampler.
inline DecompSample conditioned_above_line(double lambda, std::size_t N, RngStream& rng,
                                           ConditionOptions opt = {}) {
    require(lambda < 0.0, "conditioned_above_line: lambda must be negative");
    for (std::size_t k = 1; k <= opt.max_attempts; ++k) {
        auto s = build_vervaat_bridge_neg(lambda, N, rng);
        const bool ok = opt.continuous ? rng.uniform() < stay_above_line_probability(s, lambda, lambda)
                                       : above_line(s.path, lambda);
        if (ok) {
            s.attempts = k;
            return s;
        }
    }
    throw ResourceLimit("conditioned_above_line: acceptance rate below 1/max_attempts");
}

}  // namespace vervaat
