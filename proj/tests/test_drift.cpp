#include <gtest/gtest.h>

#include "vervaat/decomp.hpp"
#include "vervaat/drift.hpp"
#include "vervaat/parallel.hpp"
#include "vervaat/stats.hpp"

using namespace vervaat;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

template <class F>
double central(F f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

template <class F>
double second(F f, double x, double h) {
    return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
}

}  // namespace

TEST(JNeg, OracleValues) {
    const auto J = j_neg(-1, 0.3, 0.7);
    EXPECT_NEAR(J.j, 0.5103807034232485, 1e-10);
    EXPECT_NEAR(J.jring, 2.0831865445846879, 1e-10);
}

TEST(JVb, OracleValues) {
    const auto J = j_vb(0.3, 0.7);
    EXPECT_NEAR(J.j, 0.690796095155136, 1e-10);
    EXPECT_NEAR(J.jring, 1.959268033392247, 1e-10);
}

TEST(J, DerivativeIdentity) {
    for (double t : {0.0, 0.3, 0.7})
        for (double y : {0.1, 0.7, 1.5}) {
            const double h = 1e-4 * y;
            const double dn = central([&](double u) { return j_neg(-1, t, u).j; }, y, h);
            EXPECT_LT(rel(dn, -y * j_neg(-1, t, y).jring), 1e-4) << t << " " << y;
            const double dv = central([&](double u) { return j_vb(t, u).j; }, y, h);
            EXPECT_LT(rel(dv, -y * j_vb(t, y).jring), 1e-4) << t << " " << y;
        }
}

TEST(J, PositiveAndVanishingNearOne) {
    for (double t : {0.0, 0.5, 0.9})
        for (double y : {0.05, 0.5, 3.0}) {
            EXPECT_GT(j_neg(-2, t, y).j, 0.0);
            EXPECT_GT(j_vb(t, y).j, 0.0);
        }
    EXPECT_LT(j_neg(-1, 1 - 1e-6, 0.5).j, 1e-12);
    EXPECT_LT(j_vb(1 - 1e-6, 0.5).j, 1e-12);
    EXPECT_THROW(j_neg(1, 0.5, 0.5), InvalidArgument);
    EXPECT_THROW(j_vb(1.0, 0.5), InvalidArgument);
    EXPECT_THROW(j_vb(0.5, 0.0), InvalidArgument);
}

TEST(JVb, DivergesAtZero) {
    const double a = j_vb(0.4, 1e-1).j, b = j_vb(0.4, 1e-2).j, c = j_vb(0.4, 1e-3).j;
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
    // y J(t, y) -> sqrt(2) t / sqrt(pi (1 - t)) as y -> 0
    const double limit = std::numbers::sqrt2 * 0.4 / std::sqrt(std::numbers::pi * 0.6);
    EXPECT_NEAR(1e-5 * j_vb(0.4, 1e-5).j, limit, 1e-4);
    EXPECT_NEAR(1e-6 * j_vb(0.4, 1e-6).j, limit, 1e-5);
}

TEST(Phi, OracleValues) {
    EXPECT_NEAR(phi(1, 0.5, 1.3, 0.2), 1.3194861775729877, 1e-12);
    EXPECT_NEAR(phi(2, 0.3, 0.8, 0.1), 0.87211359612017778, 1e-12);
    EXPECT_THROW(phi(1, 0.5, 1.3, 0.6), InvalidArgument);
    EXPECT_THROW(phi(-1, 0.5, 1.3, 0.1), InvalidArgument);
}

TEST(Phi, ContinuityAndJumpAtLambda) {
    for (double l : {0.5, 1.0, 2.0})
        for (double t : {0.2, 0.6}) {
            const double th = 0.5 * t, e = 1e-12;
            EXPECT_LT(std::abs(phi(l, t, l + e, th) - phi(l, t, l - e, th)), 1e-10);
            const double jump = dphi(l, t, l, th, Side::above) - dphi(l, t, l, th, Side::below);
            EXPECT_LT(rel(jump, dphi_jump(l, t, th)), 1e-6);
        }
}

TEST(Phi, OriginLimit) {
    for (double l : {0.5, 1.0, 2.0}) EXPECT_NEAR(phi(l, 0.0, 1e-6, 0.0), 1.0, 1e-4) << l;
}

TEST(Phi, DerivativeMatchesFiniteDifference) {
    for (double y : {0.4, 1.6}) {
        const double d = central([&](double u) { return phi(1, 0.4, u, 0.1); }, y, 1e-4);
        EXPECT_LT(rel(d, dphi(1, 0.4, y, 0.1)), 1e-6);
    }
}

TEST(Phi, BothPartsSolveTheBesselPde) {
    for (double l : {0.5, 1.0, 2.0})
        for (double t : {0.1, 0.5})
            for (double y : {0.3 * l, 1.7 * l}) {
                for (int part = 1; part <= 2; ++part) {
                    auto f = [&](double tt, double yy) { return part == 1 ? phi1(l, tt, yy) : phi2(l, tt, yy); };
                    const double h = 1e-3 * std::min(y, 1.0), k = 1e-4;
                    const double fy = central([&](double u) { return f(t, u); }, y, h);
                    const double fyy = second([&](double u) { return f(t, u); }, y, h);
                    const double ft = central([&](double s) { return f(s, y); }, t, k);
                    EXPECT_LT(std::abs(0.5 * fyy + fy / y + ft), 1e-4) << l << " " << t << " " << y << " " << part;
                }
            }
}

TEST(PhiBar, MatchesQuadratureAndFiniteDifference) {
    RngStream rng(1, 0);
    const auto s = build_vb(256, rng);
    PhiBarTracker tr;
    int checked = 0;
    for (std::size_t k = 0; k < 240; ++k) {
        const double y = s.path.values[k];
        if (y > 0.05 && k % 7 == 0) {
            const auto fast = tr.eval(s.path.time(k), y);
            const auto slow = phi_bar_quadrature(s.path, k, 1e-9);
            EXPECT_LT(rel(fast.value, slow.value), 1e-7) << k;
            EXPECT_LT(std::abs(fast.dot - slow.dot), 1e-6 * std::max(1.0, std::abs(slow.dot))) << k;
            const double h = 1e-5 * y;
            const double fd = (tr.eval(s.path.time(k), y + h).value - tr.eval(s.path.time(k), y - h).value) / (2 * h);
            EXPECT_LT(std::abs(fd - fast.dot), 1e-3 * std::max(1.0, std::abs(fast.dot))) << k;
            ++checked;
        }
        tr.push(s.path.time(k), y);
    }
    EXPECT_GT(checked, 5);
    EXPECT_THROW(phi_bar(s.path, 5000), InvalidArgument);
}

TEST(PhiBar, OneShotEqualsTracker) {
    RngStream rng(2, 0);
    const auto s = build_vb(128, rng);
    PhiBarTracker tr;
    for (std::size_t k = 0; k < 100; ++k) {
        if (s.path.values[k] > 0.0) {
            const auto a = tr.eval(s.path.time(k), s.path.values[k]);
            const auto b = phi_bar(s.path, k);
            EXPECT_EQ(a.value, b.value);
            EXPECT_EQ(a.dot, b.dot);
        }
        tr.push(s.path.time(k), s.path.values[k]);
    }
}

namespace {

struct Pool {
    double qv = 0, time = 0;
    std::vector<double> sums, increments;
};

template <class F>
Pool pool(std::size_t paths, std::uint64_t seed, F compensated) {
    const auto cs = map_replicas(paths, seed, [&](std::size_t, RngStream& r) { return compensated(r); });
    Pool p;
    for (const auto& c : cs) {
        const auto s = residual_sums(c);
        p.qv += s.sum_sq;
        p.time += s.time;
        p.sums.push_back(s.sum);
        for (std::size_t i = 0; i < c.mask.size(); i += 37)
            if (c.mask[i]) p.increments.push_back(c.increment(i) / std::sqrt(c.original.dt()));
    }
    return p;
}

void expect_brownian(const Pool& p, double tol) {
    EXPECT_NEAR(p.qv / p.time, 1.0, tol);
    EXPECT_TRUE(moment_ztest(p.sums, 0.0, Moment::mean).pass);
    EXPECT_TRUE(ks_one_sample(p.increments, normal_cdf).pass);
}

}  // namespace

TEST(Compensator, BridgeNegResidualIsBrownian) {
    const auto p = pool(60, 3, [](RngStream& r) { return compensator_bridge_neg(build_vervaat_bridge_neg(-1, 1024, r), -1); });
    expect_brownian(p, 0.05);
}

TEST(Compensator, BridgePosResidualIsBrownian) {
    const auto p = pool(60, 4, [](RngStream& r) { return compensator_bridge_pos(build_vervaat_bridge_pos(1, 1024, r), 1); });
    expect_brownian(p, 0.05);
}

TEST(Compensator, VbResidualIsBrownian) {
    const auto p = pool(60, 5, [](RngStream& r) { return compensator_vb(build_vb(1024, r)); });
    expect_brownian(p, 0.07);
}

TEST(Compensator, MasksAndRegimes) {
    RngStream rng(6, 0);
    for (int r = 0; r < 20; ++r) {
        const auto s = build_vb(256, rng);
        const auto c = compensator_vb(s);
        EXPECT_EQ(c.stop_index.has_value(), s.path.back() <= 0.0);
        EXPECT_EQ(c.residual[0], 0.0);
        for (std::size_t i = 0; i < c.mask.size(); ++i) {
            if (c.original.time(i + 1) > 1.0 - 1.0 / 64) { EXPECT_EQ(c.mask[i], 0); }
            if (c.mask[i]) { EXPECT_TRUE(std::isfinite(c.increment(i))); }
        }
        const auto after = compensator_vb_after_zero(s);
        if (s.hit_index) {
            for (std::size_t i = 0; i < *s.hit_index; ++i) EXPECT_EQ(after.mask[i], 0);
        }
        const auto pos = compensator_bridge_pos(build_vervaat_bridge_pos(1, 256, rng), 1);
        for (std::size_t i = 0; i < pos.mask.size(); ++i)
            if (pos.mask[i]) { EXPECT_TRUE(std::isfinite(pos.drift_integral[i + 1])); }
    }
}

TEST(Compensator, ResidualSumsWindow) {
    CompensatedPath c;
    c.original = GridPath(1.0, {0, 1, 3, 6});
    c.residual = {0, 1, 3, 6};
    c.mask = {1, 0, 1};
    const auto s = residual_sums(c);
    EXPECT_DOUBLE_EQ(s.sum, 4.0);
    EXPECT_DOUBLE_EQ(s.sum_sq, 10.0);
    EXPECT_DOUBLE_EQ(s.time, 2.0 / 3.0);
    EXPECT_EQ(s.count, 2u);
    EXPECT_EQ(residual_sums(c, 1, 2).count, 0u);
}
