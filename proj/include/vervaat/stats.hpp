#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "error.hpp"
#include "json.hpp"

namespace vervaat {

inline std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

struct TestReport {
    std::string name;
    std::size_t n = 0;        // primary sample size (0 for deterministic checks)
    std::size_t n2 = 0;       // second sample size for two-sample tests
    double statistic = 0.0;
    std::optional<double> p_value;  // empty for tolerance checks
    double threshold = 0.0;   // alpha for p-value tests, tolerance otherwise
    bool pass = false;
    std::uint64_t seed = 0;
    std::string notes;
    bool informational = false;  // reported, never gating
    double value = std::numeric_limits<double>::quiet_NaN();   // estimate under test, if any
    double target = std::numeric_limits<double>::quiet_NaN();  // its reference value
};

inline nlohmann::json to_json(const TestReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["n"] = r.n;
    if (r.n2) j["n2"] = r.n2;
    j["statistic"] = std::isfinite(r.statistic) ? nlohmann::json(r.statistic) : nlohmann::json();
    j["p_value"] = r.p_value ? nlohmann::json(*r.p_value) : nlohmann::json();
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["seed"] = r.seed;
    if (!r.notes.empty()) j["notes"] = r.notes;
    if (r.informational) j["informational"] = true;
    if (std::isfinite(r.value)) j["value"] = r.value;
    if (std::isfinite(r.target)) j["target"] = r.target;
    return j;
}

inline nlohmann::json to_json(const std::vector<TestReport>& rs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rs) a.push_back(to_json(r));
    return a;
}

// Tail of the Kolmogorov distribution, P(K > x).
inline double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double m = 2.0 * k - 1.0;
            s += std::exp(-m * m * pi2 / (8.0 * x * x));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

// Asymptotic KS p-value with Stephens' small-sample correction.
inline double ks_pvalue(double d, double n_eff) {
    const double sn = std::sqrt(n_eff);
    return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

inline TestReport ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf,
                                double alpha = 1e-3, std::string name = "ks_one_sample") {
    if (xs.empty()) throw InvalidArgument("ks_one_sample: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = double(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    TestReport r;
    r.name = std::move(name);
    r.n = xs.size();
    r.statistic = d;
    r.p_value = ks_pvalue(d, n);
    r.threshold = alpha;
    r.pass = *r.p_value >= alpha;
    return r;
}

inline double ks_two_sample_statistic(std::vector<double> xs, std::vector<double> ys) {
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double n = double(xs.size()), m = double(ys.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < xs.size() && j < ys.size()) {
        const double v = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] == v) ++i;
        while (j < ys.size() && ys[j] == v) ++j;
        d = std::max(d, std::abs(i / n - j / m));
    }
    return d;
}

inline TestReport ks_two_sample(std::vector<double> xs, std::vector<double> ys, double alpha = 1e-3,
                                std::string name = "ks_two_sample") {
    if (xs.empty() || ys.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    TestReport r;
    r.name = std::move(name);
    r.n = xs.size();
    r.n2 = ys.size();
    const double n = double(xs.size()), m = double(ys.size());
    r.statistic = ks_two_sample_statistic(std::move(xs), std::move(ys));
    r.p_value = ks_pvalue(r.statistic, n * m / (n + m));
    r.threshold = alpha;
    r.pass = *r.p_value >= alpha;
    return r;
}

enum class Moment { mean, second };

inline TestReport moment_ztest(const std::vector<double>& xs, double target, Moment which,
                               double zmax = 4.0, std::string name = "moment_ztest") {
    if (xs.size() < 2) throw InvalidArgument("moment_ztest: need at least two samples");
    double s = 0.0, s2 = 0.0;
    for (double x : xs) {
        const double v = which == Moment::mean ? x : x * x;
        s += v;
    }
    const double n = double(xs.size());
    const double mean = s / n;
    for (double x : xs) {
        const double v = (which == Moment::mean ? x : x * x) - mean;
        s2 += v * v;
    }
    const double se = std::sqrt(s2 / (n - 1.0) / n);
    TestReport r;
    r.name = std::move(name);
    r.n = xs.size();
    r.threshold = zmax;
    if (se == 0.0) {
        if (mean != target) throw NumericError("moment_ztest: zero variance and mean != target");
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.pass = true;
        r.notes = "zero variance, exact match";
        return r;
    }
    r.statistic = (mean - target) / se;
    r.p_value = std::erfc(std::abs(r.statistic) / std::numbers::sqrt2);
    r.pass = std::abs(r.statistic) < zmax;
    r.notes = "empirical=" + num(mean) + " target=" + num(target);
    r.value = mean;
    r.target = target;
    return r;
}

// Pearson chi-square on binned counts; df = bins - 1 - fitted.
inline TestReport chi_square(const std::vector<double>& observed, const std::vector<double>& expected,
                             int fitted = 0, double alpha = 1e-3, std::string name = "chi_square") {
    if (observed.size() != expected.size() || observed.size() < 2)
        throw InvalidArgument("chi_square: bin count mismatch");
    double x2 = 0.0, total = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw InvalidArgument("chi_square: nonpositive expected count");
        const double d = observed[i] - expected[i];
        x2 += d * d / expected[i];
        total += observed[i];
    }
    const int df = int(observed.size()) - 1 - fitted;
    if (df < 1) throw InvalidArgument("chi_square: no degrees of freedom");
    TestReport r;
    r.name = std::move(name);
    r.n = std::size_t(total);
    r.statistic = x2;
    r.p_value = boost::math::gamma_q(0.5 * df, 0.5 * x2);
    r.threshold = alpha;
    r.pass = *r.p_value >= alpha;
    r.notes = "bins=" + std::to_string(observed.size()) + " df=" + std::to_string(df);
    return r;
}

// Deterministic check: |value - target| (relative if requested) against tol.
inline TestReport tolerance_check(std::string name, double value, double target, double tol,
                                  bool relative = false) {
    TestReport r;
    r.name = std::move(name);
    double gap = std::abs(value - target);
    if (relative && target != 0.0) gap /= std::abs(target);
    r.statistic = gap;
    r.threshold = tol;
    r.pass = std::isfinite(gap) && gap <= tol;
    r.notes = "value=" + num(value) + " target=" + num(target);
    r.value = value;
    r.target = target;
    return r;
}

inline TestReport boolean_check(std::string name, bool ok, std::string notes = {}) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = ok ? 0.0 : 1.0;
    r.pass = ok;
    r.notes = std::move(notes);
    return r;
}

}  // namespace vervaat
