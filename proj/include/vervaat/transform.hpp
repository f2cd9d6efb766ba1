#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "error.hpp"
#include "grid_path.hpp"
#include "rng.hpp"

namespace vervaat {

struct TransformResult {
    GridPath path;
    std::size_t argmin_index = 0;  // tau
    double split_time = 0.0;       // A = T - tau*T/N
};

inline std::size_t argmin_first(const GridPath& p) {
    return std::size_t(std::min_element(p.values.begin(), p.values.end()) - p.values.begin());
}

// Rotation of p at grid index tau, re-anchored at `level`:
//   V(j) = f(tau+j) - level              for j <= N - tau
//   V(j) = (f(tau+j-N) - level) + f(N)   otherwise
// With level = f(tau) this is the grid Vervaat transform.
inline GridPath rotate_at(const GridPath& p, std::size_t tau, double level) {
    const std::size_t N = p.steps();
    const auto& f = p.values;
    std::vector<double> v(N + 1);
    for (std::size_t j = 0; j <= N; ++j)
        v[j] = j <= N - tau ? f[tau + j] - level : (f[tau + j - N] - level) + f[N];
    v[0] = 0.0;
    v[N] = f[N];
    return GridPath(p.duration, std::move(v));
}

inline TransformResult vervaat(const GridPath& p) {
    require(p.front() == 0.0, "vervaat: path must start at 0");
    const std::size_t tau = argmin_first(p);
    return {rotate_at(p, tau, p.values[tau]), tau, p.duration - double(tau) * p.dt()};
}

// Minimum of the Brownian-bridge interpolant on each grid interval, drawn
// exactly: for endpoint values a, b and step dt the interval minimum is
// (a + b - sqrt((a-b)^2 - 2 dt log U)) / 2.
struct SubgridMinimum {
    double level = 0.0;
    std::size_t interval = 0;  // minimum lies in [interval, interval+1]
};

inline SubgridMinimum interpolant_minimum(const GridPath& p, RngStream& rng) {
    const double dt = p.dt();
    SubgridMinimum best{p.values[0], 0};
    for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
        const double a = p.values[i], b = p.values[i + 1];
        const double d = a - b;
        const double m = 0.5 * (a + b - std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform())));
        if (m < best.level || i == 0) best = {m, i};
    }
    return best;
}

// Vervaat transform of the continuous path behind a grid sample: the split sits
// at the grid end of the interval holding the sub-grid minimum with the lower
// value, and the path is re-anchored at the sub-grid minimum level.
inline TransformResult vervaat_refined(const GridPath& p, RngStream& rng) {
    require(p.front() == 0.0, "vervaat: path must start at 0");
    const auto m = interpolant_minimum(p, rng);
    const std::size_t i = m.interval;
    const std::size_t tau = p.values[i + 1] < p.values[i] ? i + 1 : i;
    return {rotate_at(p, tau, std::min(m.level, p.values[tau])), tau,
            p.duration - double(tau) * p.dt()};
}

// theta(f,u)_t = f(u+t) - f(u) for t <= T-u, f(u+t-T) + f(T) - f(u) otherwise.
// u is snapped to the nearest grid time.
inline GridPath shift(const GridPath& p, double u) {
    require(u >= 0.0 && u <= p.duration, "shift: u outside [0,T]");
    const std::size_t N = p.steps();
    const std::size_t k = std::min<std::size_t>(N, std::size_t(std::llround(u / p.dt())));
    const auto& f = p.values;
    std::vector<double> v(N + 1);
    for (std::size_t i = 0; i <= N; ++i)
        v[i] = i <= N - k ? f[k + i] - f[k] : (f[k + i - N] + f[N]) - f[k];
    return GridPath(p.duration, std::move(v));
}

// Smallest i > from_index with values[i] <= level.
inline std::optional<std::size_t> first_hit(const GridPath& p, double level, std::size_t from_index = 0) {
    require(from_index <= p.steps(), "first_hit: from_index beyond the grid");
    for (std::size_t i = from_index + 1; i < p.values.size(); ++i)
        if (p.values[i] <= level) return i;
    return std::nullopt;
}

inline double crossing_probability(double a, double b, double level, double dt) {
    if (a <= level || b <= level) return 1.0;
    return std::exp(-2.0 * (a - level) * (b - level) / dt);
}

// First time after grid index from_index at which the Brownian interpolant
// reaches `level`: grid crossings plus sub-grid excursions detected with the
// bridge crossing probability, located at the interval midpoint. The interval
// starting at from_index is skipped when it starts at or below the level.
inline std::optional<double> first_crossing_refined(const GridPath& p, double level,
                                                    std::size_t from_index, RngStream& rng) {
    const double dt = p.dt();
    for (std::size_t i = from_index; i + 1 < p.values.size(); ++i) {
        const double a = p.values[i], b = p.values[i + 1];
        if (a <= level) {
            if (i == from_index) continue;
            return p.time(i);
        }
        if (b <= level || rng.uniform() < crossing_probability(a, b, level, dt))
            return p.time(i) + 0.5 * dt;
    }
    return std::nullopt;
}

// sup{s <= t_k : path(s) <= level}, same sub-grid rule; 0 if the path never
// goes down to the level before t_k other than at time 0.
inline double last_below_refined(const GridPath& p, double level, std::size_t k, RngStream& rng) {
    const double dt = p.dt();
    if (p.values[k] <= level) return p.time(k);
    for (std::size_t i = k; i > 0; --i) {
        const double a = p.values[i - 1], b = p.values[i];
        if (a <= level || rng.uniform() < crossing_probability(a, b, level, dt))
            return p.time(i - 1) + 0.5 * dt;
    }
    return 0.0;
}

// Level a(t) below which the path spends a fraction t of its grid times.
inline double occupation_quantile_sorted(const std::vector<double>& sorted, double t) {
    const std::size_t N = sorted.size() - 1;
    const auto idx = std::min<std::size_t>(N, std::size_t(std::ceil(t * double(N))));
    return sorted[idx];
}

inline double occupation_quantile(const GridPath& p, double t) {
    require(t >= 0.0 && t <= p.duration, "occupation_quantile: t outside [0,T]");
    auto s = p.values;
    std::sort(s.begin(), s.end());
    return occupation_quantile_sorted(s, t / p.duration);
}

inline double local_time_sorted(const std::vector<double>& sorted, double a, double eps, double T) {
    const auto lo = std::upper_bound(sorted.begin(), sorted.end(), a - eps);
    const auto hi = std::lower_bound(sorted.begin(), sorted.end(), a + eps);
    const double count = hi > lo ? double(hi - lo) : 0.0;
    return count / double(sorted.size()) * T / (2.0 * eps);
}

// (1/(2 eps)) * Leb{s : |f(s) - a| < eps}, occupation counted over grid times.
inline double local_time_estimate(const GridPath& p, double a, double eps) {
    require(eps > 0.0, "local_time_estimate: eps must be positive");
    auto s = p.values;
    std::sort(s.begin(), s.end());
    return local_time_sorted(s, a, eps, p.duration);
}

inline double default_local_time_eps(std::size_t N) { return std::pow(double(N), -1.0 / 3.0); }

// Q_t = L^{a(t)}/2 + a(t)^+ - (a(t) - f(1))^+ from sorted values.
inline double quantile_transform_value(const std::vector<double>& sorted, double end, double t,
                                       double eps) {
    const double a = occupation_quantile_sorted(sorted, t);
    return 0.5 * local_time_sorted(sorted, a, eps, 1.0) + std::max(a, 0.0) - std::max(a - end, 0.0);
}

inline GridPath quantile_transform_bm(const GridPath& p, double eps = 0.0) {
    require(p.front() == 0.0, "quantile_transform_bm: path must start at 0");
    require(std::abs(p.duration - 1.0) < 1e-12, "quantile_transform_bm: duration must be 1");
    if (eps <= 0.0) eps = default_local_time_eps(p.steps());
    auto s = p.values;
    std::sort(s.begin(), s.end());
    std::vector<double> q(p.values.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantile_transform_value(s, p.back(), p.time(i), eps);
    return GridPath(1.0, std::move(q));
}

}  // namespace vervaat
