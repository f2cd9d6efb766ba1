#pragma once

#include <array>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "grid_path.hpp"
#include "rng.hpp"

namespace vervaat {

// Brownian bridge from x to y over [0,T], observed at sorted times in [0,T].
// Built as x + W_t - (t/T)(W_T - (y - x)); times 0 and T return x and y exactly.
inline std::vector<double> bridge_at(const std::vector<double>& times, double T, double x, double y,
                                     RngStream& rng) {
    std::vector<double> out(times.size());
    double w = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - prev;
        if (dt > 0.0) w += std::sqrt(dt) * rng.normal();
        prev = times[i];
        out[i] = w;
    }
    const double rest = T - prev;
    const double wT = rest > 0.0 ? w + std::sqrt(rest) * rng.normal() : w;
    const double shift = wT - (y - x);
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= 0.0)
            out[i] = x;
        else if (times[i] >= T)
            out[i] = y;
        else
            out[i] = x + out[i] - (times[i] / T) * shift;
    }
    return out;
}

inline std::vector<double> brownian_at(const std::vector<double>& times, RngStream& rng) {
    std::vector<double> out(times.size());
    double w = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - prev;
        if (dt > 0.0) w += std::sqrt(dt) * rng.normal();
        prev = times[i];
        out[i] = w;
    }
    return out;
}

// Cosine of the angle between the end point and e1 for a 3-d bridge whose end
// point is uniform on the sphere of radius b weighted by exp(a*b*cos/T).
inline double vmf_cosine(double kappa, RngStream& rng) {
    const double u = rng.uniform();
    if (kappa < 1e-12) return 2.0 * u - 1.0;
    const double w = 1.0 + std::log1p((1.0 - u) * std::expm1(-2.0 * kappa)) / kappa;
    return std::clamp(w, -1.0, 1.0);
}

// Bessel(3) bridge from a to b over [0,T] at sorted times. With a, b > 0 the end
// direction of the underlying 3-d bridge follows a von Mises-Fisher law, which
// makes the norm an exact BES(3) bridge; with a or b at 0 any direction works.
inline std::vector<double> bessel3_bridge_at(const std::vector<double>& times, double T, double a,
                                             double b, RngStream& rng, int* degenerate = nullptr) {
    require(a >= 0.0 && b >= 0.0, "bessel3 bridge: endpoints must be nonnegative");
    require(T > 0.0, "bessel3 bridge: duration must be positive");
    std::array<double, 3> end = {b, 0.0, 0.0};
    if (a > 0.0 && b > 0.0) {
        const double c = vmf_cosine(a * b / T, rng);
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        end = {b * c, b * s * std::cos(phi), b * s * std::sin(phi)};
    }
    const std::array<double, 3> start = {a, 0.0, 0.0};
    std::vector<double> r2(times.size(), 0.0);
    for (int k = 0; k < 3; ++k) {
        const auto comp = bridge_at(times, T, start[k], end[k], rng);
        for (std::size_t i = 0; i < times.size(); ++i) r2[i] += comp[i] * comp[i];
    }
    std::vector<double> out(times.size());
    int zeros = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= 0.0)
            out[i] = a;
        else if (times[i] >= T)
            out[i] = b;
        else {
            out[i] = std::sqrt(r2[i]);
            if (out[i] == 0.0) ++zeros;  // clamped at +0, reported
        }
    }
    if (degenerate) *degenerate += zeros;
    return out;
}

inline std::vector<double> bessel3_at(const std::vector<double>& times, RngStream& rng) {
    std::vector<double> r2(times.size(), 0.0);
    for (int k = 0; k < 3; ++k) {
        const auto comp = brownian_at(times, rng);
        for (std::size_t i = 0; i < times.size(); ++i) r2[i] += comp[i] * comp[i];
    }
    for (auto& v : r2) v = std::sqrt(v);
    return r2;
}

// Meander of length l: BES(3) bridge 0 -> sqrt(l)*Rayleigh.
inline std::vector<double> meander_at(const std::vector<double>& times, double l, RngStream& rng) {
    const double rho = std::sqrt(l) * std::sqrt(-2.0 * std::log(rng.uniform()));
    return bessel3_bridge_at(times, l, 0.0, rho, rng);
}

inline void check_grid(std::size_t N, double T) {
    require(N >= 1, "grid must have N >= 1");
    require(T > 0.0 && std::isfinite(T), "duration must be positive");
}

inline GridPath sample_bm(std::size_t N, double T, RngStream& rng) {
    check_grid(N, T);
    return GridPath(T, brownian_at(uniform_times(N, T), rng));
}

inline GridPath sample_bridge(std::size_t N, double T, double y, RngStream& rng) {
    check_grid(N, T);
    return GridPath(T, bridge_at(uniform_times(N, T), T, 0.0, y, rng));
}

inline GridPath sample_bessel3_bridge(std::size_t N, double T, double a, double b, RngStream& rng,
                                      int* degenerate = nullptr) {
    check_grid(N, T);
    return GridPath(T, bessel3_bridge_at(uniform_times(N, T), T, a, b, rng, degenerate));
}

inline GridPath sample_excursion(std::size_t N, double l, RngStream& rng) {
    return sample_bessel3_bridge(N, l, 0.0, 0.0, rng);
}

// First passage bridge 0 -> lambda < 0 of length l: lambda + BES(3) bridge |lambda| -> 0.
inline std::vector<double> fp_bridge_at(const std::vector<double>& times, double l, double lambda,
                                        RngStream& rng) {
    require(lambda < 0.0, "first passage bridge: lambda must be negative");
    auto v = bessel3_bridge_at(times, l, -lambda, 0.0, rng);
    for (auto& x : v) x += lambda;
    return v;
}

inline GridPath sample_fp_bridge(std::size_t N, double l, double lambda, RngStream& rng) {
    check_grid(N, l);
    return GridPath(l, fp_bridge_at(uniform_times(N, l), l, lambda, rng));
}

inline GridPath sample_meander(std::size_t N, double l, RngStream& rng) {
    check_grid(N, l);
    return GridPath(l, meander_at(uniform_times(N, l), l, rng));
}

inline GridPath sample_bessel3(std::size_t N, double T, RngStream& rng) {
    check_grid(N, T);
    return GridPath(T, bessel3_at(uniform_times(N, T), rng));
}

// Joins p1 and p2 (p2 shifted to start where p1 ends) and resamples the result
// on N_total uniform steps by linear interpolation.
inline GridPath concat(const GridPath& p1, const GridPath& p2, std::size_t N_total) {
    require(std::abs(p1.back() - p2.front()) <= 1e-12, "concat: junction mismatch");
    require(N_total >= 1, "concat: N_total must be >= 1");
    const double T1 = p1.duration, T = p1.duration + p2.duration;
    const double offset = p1.back() - p2.front();
    std::vector<double> v(N_total + 1);
    for (std::size_t i = 0; i <= N_total; ++i) {
        const double t = T * double(i) / double(N_total);
        v[i] = t <= T1 ? p1.value_at(std::min(t, T1)) : p2.value_at(std::min(t - T1, p2.duration)) + offset;
    }
    v[0] = p1.front();
    v[N_total] = p2.back() + offset;
    return GridPath(T, std::move(v));
}

}  // namespace vervaat
