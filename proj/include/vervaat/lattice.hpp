#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace vervaat {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Simple walk given by its +1/-1 increments; w(0) = 0.
class Walk {
public:
    Walk() = default;
    explicit Walk(std::vector<int> increments) {
        require(!increments.empty(), "Walk: length must be >= 1");
        for (int s : increments) require(s == 1 || s == -1, "Walk: increments must be +1 or -1");
        steps_.assign(increments.begin(), increments.end());
    }

    // Bit j set means step j+1 is +1.
    static Walk from_bits(std::uint64_t bits, int n) {
        std::vector<int> inc(n);
        for (int j = 0; j < n; ++j) inc[j] = (bits >> j) & 1u ? 1 : -1;
        return Walk(std::move(inc));
    }

    static Walk from_positions(const std::vector<int>& pos) {
        require(pos.size() >= 2 && pos[0] == 0, "Walk: positions must start at 0");
        std::vector<int> inc(pos.size() - 1);
        for (std::size_t j = 0; j + 1 < pos.size(); ++j) inc[j] = pos[j + 1] - pos[j];
        return Walk(std::move(inc));
    }

    int size() const { return int(steps_.size()); }
    int step(int j) const { return steps_[j]; }  // j-th increment, 0-based
    std::vector<int> increments() const { return {steps_.begin(), steps_.end()}; }

    std::vector<int> positions() const {
        std::vector<int> p(steps_.size() + 1, 0);
        for (std::size_t j = 0; j < steps_.size(); ++j) p[j + 1] = p[j] + steps_[j];
        return p;
    }

    int endpoint() const {
        int a = 0;
        for (int s : steps_) a += s;
        return a;
    }

    std::uint64_t to_bits() const {
        std::uint64_t b = 0;
        for (std::size_t j = 0; j < steps_.size(); ++j)
            if (steps_[j] > 0) b |= std::uint64_t(1) << j;
        return b;
    }

    friend bool operator==(const Walk&, const Walk&) = default;
    friend auto operator<=>(const Walk&, const Walk&) = default;

private:
    std::vector<signed char> steps_;
};

inline BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    BigInt c = 1;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

inline void check_bridge_args(int n, int a) {
    require(n >= 1, "walk length must be >= 1");
    require(std::abs(a) <= n, "|a| must not exceed n");
    require(((n - a) % 2) == 0, "parity mismatch: a must have the parity of n");
}

// All walks of length n ending at a, in bit-counter order (step 1 = lowest bit).
inline std::vector<Walk> enumerate_bridges(int n, int a) {
    check_bridge_args(n, a);
    if (n > 26) throw ResourceLimit("enumerate_bridges: n too large for enumeration");
    const int ups = (n + a) / 2;
    std::vector<Walk> out;
    for (std::uint64_t b = 0; b < (std::uint64_t(1) << n); ++b)
        if (std::popcount(b) == ups) out.push_back(Walk::from_bits(b, n));
    return out;
}

inline int first_argmin(const std::vector<int>& pos) {
    return int(std::min_element(pos.begin(), pos.end()) - pos.begin());
}

struct VervaatWalk {
    Walk walk;
    int k = 0;  // helper K = n - tau
};

inline VervaatWalk vervaat_walk(const Walk& w) {
    const auto p = w.positions();
    const int n = w.size();
    const int tau = first_argmin(p);
    std::vector<int> v(n + 1);
    for (int j = 0; j <= n; ++j)
        v[j] = j <= n - tau ? p[tau + j] - p[tau] : p[tau + j - n] + p[n] - p[tau];
    return {Walk::from_positions(v), n - tau};
}

// Increments reordered by the level they start from, ties by time (stable sort).
inline Walk quantile_walk(const Walk& w) {
    const auto p = w.positions();
    const int n = w.size();
    std::vector<int> idx(n);
    for (int j = 0; j < n; ++j) idx[j] = j + 1;
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return p[i - 1] < p[j - 1]; });
    std::vector<int> inc(n);
    for (int i = 0; i < n; ++i) inc[i] = w.step(idx[i] - 1);
    return Walk(std::move(inc));
}

// First index at which the walk visits level (0 if never).
inline int first_visit(const Walk& w, int level) {
    const auto p = w.positions();
    for (std::size_t j = 0; j < p.size(); ++j)
        if (p[j] == level) return int(j);
    return 0;
}

struct ExactPmf {
    std::vector<int> support;
    std::vector<Rational> masses;

    Rational total() const {
        Rational t = 0;
        for (const auto& m : masses) t += m;
        return t;
    }
    Rational mass(int l) const {
        const auto it = std::lower_bound(support.begin(), support.end(), l);
        return it != support.end() && *it == l ? masses[it - support.begin()] : Rational(0);
    }
    double cdf(int l) const {
        Rational c = 0;
        for (std::size_t i = 0; i < support.size() && support[i] <= l; ++i) c += masses[i];
        return c.convert_to<double>();
    }
};

// Walks of length m whose first visit to -d happens at time m.
inline BigInt first_passage_count(int m, int d) {
    if (d == 0) return m == 0 ? 1 : 0;
    if (m < d || ((m - d) % 2) != 0) return 0;
    return BigInt(d) * binomial(m, (m + d) / 2) / m;
}

inline BigInt count_first_passage(int l) {
    require(l >= 1 && l % 2 == 1, "count_first_passage: l must be odd and positive");
    return first_passage_count(l, 1);
}

// Law of the first -1 visit of V(w) for w uniform among bridges to a < 0.
inline ExactPmf z_pmf(int n, int a) {
    check_bridge_args(n, a);
    require(a < 0, "z_pmf: endpoint must be negative");
    const BigInt total = binomial(n, (n - a) / 2);
    ExactPmf pmf;
    for (int l = 1; l <= n; l += 2) {
        const BigInt c = binomial(l, (l + 1) / 2) * first_passage_count(n - l, -a - 1);
        if (c == 0) continue;
        pmf.support.push_back(l);
        pmf.masses.emplace_back(c, total);
    }
    return pmf;
}

// Same law computed by brute force over all bridges.
inline ExactPmf z_pmf_enumerated(int n, int a) {
    check_bridge_args(n, a);
    require(a < 0, "z_pmf_enumerated: endpoint must be negative");
    if (n > 20) throw ResourceLimit("z_pmf_enumerated: n too large");
    std::map<int, long> counts;
    long total = 0;
    for (const auto& w : enumerate_bridges(n, a)) {
        ++counts[first_visit(vervaat_walk(w).walk, -1)];
        ++total;
    }
    ExactPmf pmf;
    for (const auto& [l, c] : counts) {
        pmf.support.push_back(l);
        pmf.masses.emplace_back(c, total);
    }
    return pmf;
}

inline bool operator==(const ExactPmf& x, const ExactPmf& y) {
    return x.support == y.support && x.masses == y.masses;
}

inline void check_enumeration_size(int n, int limit, const char* who) {
    if (n > limit) throw ResourceLimit(std::string(who) + ": n too large for exhaustive enumeration");
}

// (v, k) pairs in the image set: v a bridge to a with v >= 0 on [0,k], v > a on [k,n).
inline bool in_image_set(const Walk& v, int k, int a) {
    const auto p = v.positions();
    const int n = v.size();
    if (p[n] != a || k < 0 || k > n) return false;
    for (int j = 0; j <= k; ++j)
        if (p[j] < 0) return false;
    for (int j = k; j < n; ++j)
        if (p[j] <= a) return false;
    return true;
}

inline TestReport verify_bijection(int n, int a) {
    check_bridge_args(n, a);
    require(a < 0, "verify_bijection: endpoint must be negative");
    check_enumeration_size(n, 16, "verify_bijection");
    const auto bridges = enumerate_bridges(n, a);
    std::map<std::pair<std::uint64_t, int>, std::uint64_t> image;
    std::string notes;
    long bad = 0;
    for (const auto& w : bridges) {
        const auto [v, k] = vervaat_walk(w);
        if (!in_image_set(v, k, a)) {
            if (!bad++) notes = "image outside set for w bits=" + std::to_string(w.to_bits());
        }
        if (!image.emplace(std::pair{v.to_bits(), k}, w.to_bits()).second) {
            if (!bad++) notes = "not injective at w bits=" + std::to_string(w.to_bits());
        }
    }
    // Every member of the set must be hit.
    long set_size = 0;
    for (const auto& v : bridges)
        for (int k = 0; k <= n; ++k)
            if (in_image_set(v, k, a)) {
                ++set_size;
                if (!image.count({v.to_bits(), k}) && !bad++)
                    notes = "set member not hit: v bits=" + std::to_string(v.to_bits());
            }
    if (set_size != long(image.size()) && !bad++) notes = "image and set sizes differ";
    auto r = boolean_check("bijection n=" + std::to_string(n) + " a=" + std::to_string(a), bad == 0,
                           notes);
    r.n = bridges.size();
    r.statistic = double(bad);
    return r;
}

inline TestReport verify_helper_uniform(int n, int a) {
    check_bridge_args(n, a);
    require(a < 0, "verify_helper_uniform: endpoint must be negative");
    check_enumeration_size(n, 16, "verify_helper_uniform");
    std::map<std::uint64_t, std::vector<int>> ks;
    const auto bridges = enumerate_bridges(n, a);
    for (const auto& w : bridges) {
        const auto [v, k] = vervaat_walk(w);
        ks[v.to_bits()].push_back(k);
    }
    long bad = 0;
    std::string notes;
    for (auto& [bits, list] : ks) {
        const int z = first_visit(Walk::from_bits(bits, n), -1);
        std::sort(list.begin(), list.end());
        bool ok = int(list.size()) == z;
        for (int i = 0; ok && i < z; ++i) ok = list[i] == i;
        if (!ok && !bad++) notes = "helper multiset wrong for v bits=" + std::to_string(bits);
    }
    auto r = boolean_check("helper_uniform n=" + std::to_string(n) + " a=" + std::to_string(a),
                           bad == 0, notes);
    r.n = bridges.size();
    r.statistic = double(bad);
    return r;
}

inline TestReport verify_q_equals_v(int n) {
    require(n >= 1, "verify_q_equals_v: n must be >= 1");
    check_enumeration_size(n, 14, "verify_q_equals_v");
    std::map<std::uint64_t, long> q, v;
    std::map<int, std::map<std::uint64_t, long>> qa, va;
    for (std::uint64_t b = 0; b < (std::uint64_t(1) << n); ++b) {
        const Walk w = Walk::from_bits(b, n);
        const auto qb = quantile_walk(w).to_bits();
        const auto vb = vervaat_walk(w).walk.to_bits();
        ++q[qb];
        ++v[vb];
        ++qa[w.endpoint()][qb];
        ++va[w.endpoint()][vb];
    }
    const bool global = q == v;
    bool per_endpoint = true;
    for (const auto& [a, m] : qa) per_endpoint = per_endpoint && m == va[a];
    auto r = boolean_check("q_equals_v n=" + std::to_string(n), global && per_endpoint,
                           std::string("unconditional=") + (global ? "equal" : "differ") +
                               " per_endpoint=" + (per_endpoint ? "equal" : "differ"));
    r.n = std::size_t(1) << n;
    return r;
}

// Uniform bridge of length n to a (random arrangement of the steps).
inline Walk sample_bridge_walk(int n, int a, RngStream& rng) {
    check_bridge_args(n, a);
    std::vector<int> inc(n, -1);
    std::fill(inc.begin(), inc.begin() + (n + a) / 2, 1);
    for (int i = n - 1; i > 0; --i) {
        const int j = std::min(i, int(rng.uniform() * (i + 1)));
        std::swap(inc[i], inc[j]);
    }
    return Walk(std::move(inc));
}

}  // namespace vervaat
