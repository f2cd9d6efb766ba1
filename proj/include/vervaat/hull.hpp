#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"
#include "grid_path.hpp"

namespace vervaat {

struct Vertex {
    double t, x;
};

struct Minorant {
    std::vector<Vertex> vertices;  // includes both path endpoints

    std::size_t segment_count() const { return vertices.size() - 1; }
    double slope(std::size_t seg) const {
        const auto& a = vertices[seg];
        const auto& b = vertices[seg + 1];
        return (b.x - a.x) / (b.t - a.t);
    }
    double last_slope() const { return slope(segment_count() - 1); }
    double value_at(double t) const;
};

// Lower convex hull by monotone chain. A middle point is dropped when it lies
// on or above the chord of its neighbours, up to `tol` in the cross product.
inline Minorant convex_minorant(const GridPath& p, double tol = 1e-12) {
    Minorant m;
    auto& h = m.vertices;
    h.reserve(64);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const Vertex c{p.time(i), p.values[i]};
        while (h.size() >= 2) {
            const Vertex& a = h[h.size() - 2];
            const Vertex& b = h.back();
            const double cross = (b.t - a.t) * (c.x - a.x) - (b.x - a.x) * (c.t - a.t);
            if (cross <= tol) h.pop_back();  // b not strictly below chord a-c
            else break;
        }
        h.push_back(c);
    }
    return m;
}

inline double Minorant::value_at(double t) const {
    require(t >= vertices.front().t && t <= vertices.back().t, "Minorant::value_at: time outside range");
    std::size_t i = 0;
    while (i + 2 < vertices.size() && vertices[i + 1].t < t) ++i;
    const auto& a = vertices[i];
    const auto& b = vertices[i + 1];
    return a.x + (b.x - a.x) * (t - a.t) / (b.t - a.t);
}

inline double last_slope(const Minorant& m) { return m.last_slope(); }
inline std::size_t segment_count(const Minorant& m) { return m.segment_count(); }

// The minorant as a path on the same grid.
inline GridPath minorant_path(const Minorant& m, const GridPath& p) {
    std::vector<double> v(p.values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.value_at(p.time(i));
    return GridPath(p.duration, std::move(v));
}

}  // namespace vervaat
