#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "decomp.hpp"
#include "error.hpp"
#include "grid_path.hpp"
#include "laws.hpp"
#include "numeric.hpp"

namespace vervaat {

// ---- J integrals -----------------------------------------------------------
//
// J_t(y) = int_t^1 (s/(s-t))^{3/2} exp(-y^2/(2(s-t))) w(s) ds, and Jring the
// same with an extra 1/(s-t), so that dJ/dy = -y Jring. With s - t = y^2/(2v^2)
// both become Gaussian integrals in v over [y/sqrt(2(1-t)), inf):
//   J     = (2 sqrt2 / y) int exp(-v^2) s^{3/2} w(s) dv
//   Jring = (2 sqrt2 / y) int exp(-v^2) s^{3/2} w(s) (2 v^2 / y^2) dv

struct JValue {
    double j = 0.0;
    double jring = 0.0;
};

inline constexpr Quadrature kJQuadrature{1e-12, 15};

namespace detail {

inline void check_j_args(double t, double y, const char* who) {
    require(t >= 0.0 && t < 1.0, std::string(who) + ": t must lie in [0,1)");
    require(y > 0.0 && std::isfinite(y), std::string(who) + ": y must be positive");
}

}  // namespace detail

inline JValue j_neg(double lambda, double t, double y) {
    require(lambda < 0.0, "j_neg: lambda must be negative");
    detail::check_j_args(t, y, "j_neg");
    const double vmin = y / std::sqrt(2.0 * (1.0 - t));
    const double pre = 2.0 * std::numbers::sqrt2 / y;
    const double l2 = lambda * lambda, al = std::abs(lambda);
    // s^{3/2} f_Z(s) with 1 - s = (1-t)(1 - vmin^2/v^2) kept accurate.
    auto base = [=](double v) {
        const double v2 = v * v;
        const double s = t + y * y / (2.0 * v2);
        const double u = (1.0 - t) * (v - vmin) * (v + vmin) / v2;
        if (u <= 0.0) return 0.0;
        return std::exp(-v2) * s * al / std::sqrt(2.0 * std::numbers::pi * u * u * u) *
               std::exp(-l2 * s / (2.0 * u));
    };
    JValue r;
    r.j = pre * integrate_to_inf(base, vmin, kJQuadrature);
    r.jring = pre * integrate_to_inf([&](double v) { return base(v) * 2.0 * v * v / (y * y); }, vmin,
                                     kJQuadrature);
    return r;
}

// Arcsine weight 1/(pi sqrt(s(1-s))). The extra substitution v = vmin + w^2
// removes the inverse square root at s = 1.
inline JValue j_vb(double t, double y) {
    detail::check_j_args(t, y, "j_vb");
    const double vmin = y / std::sqrt(2.0 * (1.0 - t));
    const double pre = 2.0 * std::numbers::sqrt2 / y;
    const double c = 2.0 / (std::numbers::pi * std::sqrt(1.0 - t));
    auto base = [=](double w) {
        const double v = vmin + w * w;
        const double s = t + y * y / (2.0 * v * v);
        return std::exp(-v * v) * s * c * v / std::sqrt(2.0 * vmin + w * w);
    };
    JValue r;
    r.j = pre * integrate_to_inf(base, 0.0, kJQuadrature);
    r.jring = pre * integrate_to_inf(
                        [&](double w) {
                            const double v = vmin + w * w;
                            return base(w) * 2.0 * v * v / (y * y);
                        },
                        0.0, kJQuadrature);
    return r;
}

// ---- Phi family (lambda > 0) ----------------------------------------------
//
// Phi1(t,y) = e^{l^2/2}/(2 sqrt2 y) int_{(y-l)^2/2(1-t)}^{(y+l)^2/2(1-t)} e^{-u} u^{-1/2} du
// Phi2(t,y) = (y-l)/((1-t)^{3/2} y) e^{l^2/2} exp(-(y-l)^2/(2(1-t)))
// Phi(t,y,theta) = Phi1 + (1-theta) max(0, Phi2)
//
// The *_scaled variants omit the factor e^{l^2/2}.

enum class Side { below, above };  // one-sided y-derivative at y = lambda

namespace detail {

inline void check_phi_args(double lambda, double t, double y) {
    require(lambda > 0.0 && std::isfinite(lambda), "phi: lambda must be positive");
    require(t >= 0.0 && t < 1.0, "phi: t must lie in [0,1)");
    require(y > 0.0 && std::isfinite(y), "phi: y must be positive");
}

}  // namespace detail

inline double phi1_scaled(double lambda, double t, double y) {
    detail::check_phi_args(lambda, t, y);
    const double c = std::sqrt(2.0 * (1.0 - t));
    return std::sqrt(std::numbers::pi) / (2.0 * std::numbers::sqrt2 * y) *
           erf_diff(std::abs(y - lambda) / c, (y + lambda) / c);
}

inline double phi2_scaled(double lambda, double t, double y) {
    detail::check_phi_args(lambda, t, y);
    const double v = 1.0 - t;
    return (y - lambda) / (v * std::sqrt(v) * y) * std::exp(-(y - lambda) * (y - lambda) / (2.0 * v));
}

inline double dphi1_scaled(double lambda, double t, double y, Side side = Side::above) {
    detail::check_phi_args(lambda, t, y);
    const double c = std::sqrt(2.0 * (1.0 - t));
    const double C = std::sqrt(std::numbers::pi) / (2.0 * std::numbers::sqrt2 * y);
    const double sgn = y > lambda ? 1.0 : y < lambda ? -1.0 : (side == Side::above ? 1.0 : -1.0);
    const double a = (y - lambda) / c, b = (y + lambda) / c;
    return -phi1_scaled(lambda, t, y) / y +
           C * 2.0 / (std::sqrt(std::numbers::pi) * c) * (std::exp(-b * b) - sgn * std::exp(-a * a));
}

inline double dphi2_scaled(double lambda, double t, double y) {
    detail::check_phi_args(lambda, t, y);
    const double v = 1.0 - t;
    const double d = y - lambda;
    return std::exp(-d * d / (2.0 * v)) / (v * std::sqrt(v)) * (lambda / (y * y) - d * d / (v * y));
}

inline double phi_scaled(double lambda, double t, double y, double theta) {
    require(theta >= 0.0 && theta <= t, "phi: theta must lie in [0,t]");
    return phi1_scaled(lambda, t, y) + (1.0 - theta) * std::max(0.0, phi2_scaled(lambda, t, y));
}

inline double dphi_scaled(double lambda, double t, double y, double theta, Side side = Side::above) {
    require(theta >= 0.0 && theta <= t, "phi: theta must lie in [0,t]");
    const bool upper = y > lambda || (y == lambda && side == Side::above);
    return dphi1_scaled(lambda, t, y, side) + (upper ? (1.0 - theta) * dphi2_scaled(lambda, t, y) : 0.0);
}

inline double phi1(double lambda, double t, double y) {
    return std::exp(0.5 * lambda * lambda) * phi1_scaled(lambda, t, y);
}
inline double phi2(double lambda, double t, double y) {
    return std::exp(0.5 * lambda * lambda) * phi2_scaled(lambda, t, y);
}
inline double phi(double lambda, double t, double y, double theta) {
    return std::exp(0.5 * lambda * lambda) * phi_scaled(lambda, t, y, theta);
}
inline double dphi(double lambda, double t, double y, double theta, Side side = Side::above) {
    return std::exp(0.5 * lambda * lambda) * dphi_scaled(lambda, t, y, theta, side);
}

// Jump of the y-derivative of Phi across y = lambda.
inline double dphi_jump(double lambda, double t, double theta) {
    return (t - theta) / (std::pow(1.0 - t, 1.5) * lambda) * std::exp(0.5 * lambda * lambda);
}

struct DriftEval {
    double t = 0.0, y = 0.0, theta = 0.0;
    double value = 0.0;  // Phi
    double dy = 0.0;     // d/dy Phi
};

inline DriftEval phi_eval(double lambda, double t, double y, double theta) {
    return {t, y, theta, phi(lambda, t, y, theta), dphi(lambda, t, y, theta)};
}

// ---- path functionals Phibar, Phidot ----------------------------------------
//
// Phibar(t, g) = (2/sqrt(2 pi)) int_0^inf Phi^l(t, g(t), theta_l) e^{-l^2/2} dl with
// theta_l = sup{s <= t : g(s) <= l}. theta_l is piecewise constant in l: its
// breakpoints are the strict suffix minima of the history, kept on a stack.
// On each piece the integral is closed-form.

struct PhiBar {
    double value = 0.0;  // Phibar
    double dot = 0.0;    // Phidot: integral of the y-derivative
};

class PhiBarTracker {
public:
    // Record the grid point (time, value); it becomes history for later evaluations.
    void push(double time, double value) {
        while (!stack_.empty() && stack_.back().value >= value) stack_.pop_back();
        stack_.push_back({time, value});
    }

    // Phibar and Phidot at time t with current value y > 0, given the pushed history.
    PhiBar eval(double t, double y) const {
        require(y > 0.0, "phi_bar: current value must be positive");
        require(t >= 0.0 && t < 1.0, "phi_bar: t must lie in [0,1)");
        const double v = 1.0 - t;
        const double c = std::sqrt(2.0 * v);
        const double k = 2.0 / kSqrt2Pi;
        PhiBar r;
        // Phi1 part, integrated over all l > 0.
        const double z = y / c;
        const double G = z * std::erfc(z) - std::expm1(-z * z) / std::sqrt(std::numbers::pi);
        r.value = c * G / y;
        r.dot = std::erfc(z) / y - c * G / (y * y);
        // Phi2 part: l in [0, y) split by theta pieces.
        auto E = [&](double l) { return std::exp(-(y - l) * (y - l) / (2.0 * v)); };
        auto F = [&](double x) { return std::exp(-x * x / (2.0 * v)) * (x + v / y); };
        for (std::size_t j = 0; j < stack_.size(); ++j) {
            const double a = std::max(stack_[j].value, 0.0);
            const double b = std::min(j + 1 < stack_.size() ? stack_[j + 1].value : y, y);
            if (!(b > a)) continue;
            const double w = k * (1.0 - stack_[j].time);
            r.value += w / (std::sqrt(v) * y) * (E(b) - E(a));
            r.dot += w / (y * v * std::sqrt(v)) * (F(y - a) - F(y - b));
        }
        return r;
    }

    void clear() { stack_.clear(); }

private:
    struct Entry {
        double time, value;
    };
    std::vector<Entry> stack_;
};

// Phibar/Phidot at grid index k of p (history = values before k).
inline PhiBar phi_bar(const GridPath& p, std::size_t k) {
    require(k < p.values.size(), "phi_bar: index beyond the grid");
    PhiBarTracker tr;
    for (std::size_t i = 0; i < k; ++i) tr.push(p.time(i), p.values[i]);
    return tr.eval(p.time(k), p.values[k]);
}

// theta_l for a given l, from the grid history before index k (k itself
// counts when its value is <= l).
inline double last_time_below(const GridPath& p, std::size_t k, double level) {
    for (std::size_t i = k + 1; i-- > 0;)
        if (p.values[i] <= level) return p.time(i);
    return 0.0;
}

// Direct quadrature of the defining l-integrals (l = tan u); test oracle.
inline PhiBar phi_bar_quadrature(const GridPath& p, std::size_t k, double rel_tol = 1e-10) {
    const double t = p.time(k), y = p.values[k];
    require(y > 0.0, "phi_bar: current value must be positive");
    // Breakpoints of theta_l, plus l = y, so each quadrature piece is smooth.
    std::vector<double> cuts = {0.0, y};
    for (std::size_t i = 0; i < k; ++i)
        if (p.values[i] > 0.0 && p.values[i] < y) cuts.push_back(p.values[i]);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double k2 = 2.0 / kSqrt2Pi;
    PhiBar r;
    auto piece = [&](double lo, double hi, bool dot) {
        const double l_mid = std::tan(0.5 * (lo + hi));
        const bool above = y > l_mid;
        const double th = above && k > 0 ? last_time_below(p, k - 1, l_mid) : t;
        auto f = [&](double u) {
            const double l = std::tan(u), sec2 = 1.0 + l * l;
            const double g = dot ? dphi_scaled(l, t, y, th, above ? Side::above : Side::below)
                                 : phi_scaled(l, t, y, th);
            return k2 * g * sec2;
        };
        return integrate_smooth(f, lo, hi, {rel_tol, 15});
    };
    std::vector<double> us;
    for (double c : cuts) us.push_back(std::atan(c));
    us.push_back(0.5 * std::numbers::pi);
    for (std::size_t i = 0; i + 1 < us.size(); ++i) {
        if (us[i + 1] <= us[i]) continue;
        r.value += piece(us[i], us[i + 1], false);
        r.dot += piece(us[i], us[i + 1], true);
    }
    return r;
}

// ---- compensators ----------------------------------------------------------

struct CompensatorOptions {
    double time_guard = 1.0 / 64.0;  // increments kept on s <= 1 - time_guard
    double state_guard = 1e-3;       // denominator state at the left point >= state_guard
    // Sign convention for the Phidot term before the first zero of V(B):
    //   derived: 1/V + (Phidot - V Jring)/(Phibar + J)
    //   printed: 1/V - (Phidot + V Jring)/(Phibar + J)
    bool printed_vb_sign = false;
};

struct CompensatedPath {
    GridPath original;
    std::vector<double> drift_integral;  // cumulative left-point sums, [0] = 0
    std::vector<double> residual;        // original - drift_integral
    std::vector<char> mask;              // increment i -> i+1 inside the guarded window
    std::optional<std::size_t> stop_index;

    double increment(std::size_t i) const { return residual[i + 1] - residual[i]; }
};

namespace detail {

// drift(i) returns the drift at the left point of increment i, or nullopt if
// the increment is outside the guarded window.
template <class Drift>
CompensatedPath compensate(const GridPath& p, std::optional<std::size_t> stop, Drift drift) {
    const std::size_t N = p.steps();
    const double dt = p.dt();
    CompensatedPath c;
    c.original = p;
    c.stop_index = stop;
    c.drift_integral.assign(N + 1, 0.0);
    c.residual.assign(N + 1, 0.0);
    c.mask.assign(N, 0);
    for (std::size_t i = 0; i < N; ++i) {
        const auto d = drift(i);
        double inc = 0.0;
        if (d && std::isfinite(*d)) {
            inc = *d * dt;
            c.mask[i] = 1;
        }
        c.drift_integral[i + 1] = c.drift_integral[i] + inc;
    }
    for (std::size_t i = 0; i <= N; ++i) c.residual[i] = p.values[i] - c.drift_integral[i];
    c.residual[0] = p.values[0];
    return c;
}

// Grid index of the regime switch: smallest i with time(i) >= z.
inline std::size_t switch_index(const GridPath& p, double z) {
    const auto k = std::size_t(std::ceil(z / p.dt() - 1e-9));
    return std::min(k, p.steps());
}

}  // namespace detail

// Vervaat bridge, lambda < 0: before Z drift 1/V - V Jring/J, after Z
// 1/(V+|l|) - (V+|l|)/(1-s). The regime follows the left point of each
// increment, and masks depend only on left-point values, so the masked sums
// stay martingale sums.
inline CompensatedPath compensator_bridge_neg(const DecompSample& sample, double lambda,
                                              CompensatorOptions opt = {}) {
    require(lambda < 0.0, "compensator_bridge_neg: lambda must be negative");
    const auto& p = sample.path;
    double z = sample.z;
    if (!std::isfinite(z)) {
        require(sample.hit_index.has_value(), "compensator_bridge_neg: sample has no first return");
        z = p.time(*sample.hit_index);
    }
    const std::size_t k = detail::switch_index(p, z);
    const double al = std::abs(lambda);
    return detail::compensate(p, k, [&](std::size_t i) -> std::optional<double> {
        const double s = p.time(i), x = p.values[i];
        if (p.time(i + 1) > 1.0 - opt.time_guard) return std::nullopt;
        if (i < k) {
            if (x < opt.state_guard) return std::nullopt;
            const auto J = j_neg(lambda, s, x);
            return 1.0 / x - x * J.jring / J.j;
        }
        const double w = x + al;
        if (w < opt.state_guard) return std::nullopt;
        return 1.0 / w - w / (1.0 - s);
    });
}

// Vervaat bridge, lambda > 0: drift 1/V + dPhi/Phi(s, V, theta~).
inline CompensatedPath compensator_bridge_pos(const DecompSample& sample, double lambda,
                                              CompensatorOptions opt = {}) {
    require(lambda > 0.0, "compensator_bridge_pos: lambda must be positive");
    const auto& p = sample.path;
    double theta = 0.0;
    return detail::compensate(p, std::nullopt, [&](std::size_t i) -> std::optional<double> {
        const double s = p.time(i), x = p.values[i];
        if (x <= lambda) theta = s;
        if (p.time(i + 1) > 1.0 - opt.time_guard || x < opt.state_guard) return std::nullopt;
        const Side side = x < lambda ? Side::below : Side::above;
        return 1.0 / x + dphi_scaled(lambda, s, x, theta, side) / phi_scaled(lambda, s, x, theta);
    });
}

// V(B): before the first zero T0 the Phibar/J drift, after it -(V - M)/(1-s)
// with M the running minimum, regime by left point.
// Returns the path compensated with the derived and with the printed sign of
// the Phidot term; J and Phibar are evaluated once for both.
inline std::pair<CompensatedPath, CompensatedPath> compensator_vb_both(const DecompSample& sample,
                                                                       CompensatorOptions opt = {}) {
    const auto& p = sample.path;
    const std::size_t N = p.steps();
    const auto hit = first_hit(p, 0.0, 0);
    const std::size_t k = hit ? *hit : N + 1;
    struct Terms {
        bool ok = false;
        double base = 0.0;  // 1/V before T0, -(V-M)/(1-s) after
        double dot = 0.0;   // Phidot / (Phibar + J)
        double vj = 0.0;    // V Jring / (Phibar + J)
    };
    std::vector<Terms> terms(N);
    PhiBarTracker tracker;
    double running_min = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double s = p.time(i), x = p.values[i];
        const bool guarded = p.time(i + 1) <= 1.0 - opt.time_guard;
        auto& T = terms[i];
        if (i >= k) {
            running_min = std::min(running_min, x);
            T.ok = guarded;
            T.base = -(x - running_min) / (1.0 - s);
            continue;
        }
        if (guarded && x >= opt.state_guard) {
            const auto pb = tracker.eval(s, x);
            const auto J = j_vb(s, x);
            const double den = pb.value + J.j;
            T = {true, 1.0 / x, pb.dot / den, x * J.jring / den};
        }
        tracker.push(s, x);
    }
    auto build = [&](bool printed) {
        return detail::compensate(p, hit, [&](std::size_t i) -> std::optional<double> {
            const auto& T = terms[i];
            if (!T.ok) return std::nullopt;
            if (i >= k) return T.base;
            return printed ? T.base - T.dot - T.vj : T.base + T.dot - T.vj;
        });
    };
    return {build(false), build(true)};
}

inline CompensatedPath compensator_vb(const DecompSample& sample, CompensatorOptions opt = {}) {
    auto both = compensator_vb_both(sample, opt);
    return opt.printed_vb_sign ? std::move(both.second) : std::move(both.first);
}

// V(B) after its first zero only: drift -(V - M)/(1-s); earlier increments
// are masked.
inline CompensatedPath compensator_vb_after_zero(const DecompSample& sample, CompensatorOptions opt = {}) {
    const auto& p = sample.path;
    const auto hit = first_hit(p, 0.0, 0);
    const std::size_t k = hit ? *hit : p.steps() + 1;
    double running_min = 0.0;
    return detail::compensate(p, hit, [&](std::size_t i) -> std::optional<double> {
        if (i < k) return std::nullopt;
        const double s = p.time(i), x = p.values[i];
        running_min = std::min(running_min, x);
        if (p.time(i + 1) > 1.0 - opt.time_guard) return std::nullopt;
        return -(x - running_min) / (1.0 - s);
    });
}

// ---- residual statistics ---------------------------------------------------

struct ResidualSums {
    double sum = 0.0;     // sum of masked residual increments
    double sum_sq = 0.0;  // sum of their squares
    double time = 0.0;    // masked elapsed time
    std::size_t count = 0;
};

// Over the masked increments i in [lo, hi).
inline ResidualSums residual_sums(const CompensatedPath& c, std::size_t lo = 0,
                                  std::size_t hi = std::size_t(-1)) {
    ResidualSums r;
    const double dt = c.original.dt();
    for (std::size_t i = lo; i < std::min(hi, c.mask.size()); ++i) {
        if (!c.mask[i]) continue;
        const double d = c.increment(i);
        r.sum += d;
        r.sum_sq += d * d;
        r.time += dt;
        ++r.count;
    }
    return r;
}

}  // namespace vervaat
