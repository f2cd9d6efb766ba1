#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"

namespace vervaat {

// Path sampled at times i*T/N, i = 0..N.
struct GridPath {
    double duration = 1.0;
    std::vector<double> values;

    GridPath() = default;
    GridPath(double T, std::vector<double> v) : duration(T), values(std::move(v)) {
        require(T > 0.0, "GridPath: duration must be positive");
        require(values.size() >= 2, "GridPath: need at least two points");
    }

    std::size_t steps() const { return values.size() - 1; }
    double dt() const { return duration / double(steps()); }
    double time(std::size_t i) const { return duration * double(i) / double(steps()); }
    double front() const { return values.front(); }
    double back() const { return values.back(); }
    double operator[](std::size_t i) const { return values[i]; }

    // Linear interpolation between grid points.
    double value_at(double t) const {
        require(t >= 0.0 && t <= duration, "GridPath::value_at: time outside [0,T]");
        const double x = t / dt();
        const std::size_t i = std::min<std::size_t>(std::size_t(x), steps() - 1);
        const double w = x - double(i);
        return values[i] + w * (values[i + 1] - values[i]);
    }
};

inline std::vector<double> uniform_times(std::size_t N, double T) {
    std::vector<double> t(N + 1);
    for (std::size_t i = 0; i <= N; ++i) t[i] = T * double(i) / double(N);
    return t;
}

}  // namespace vervaat
