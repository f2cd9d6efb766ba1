#include <gtest/gtest.h>

#include "vervaat/decomp.hpp"
#include "vervaat/parallel.hpp"
#include "vervaat/stats.hpp"

using namespace vervaat;

TEST(BuildNeg, ShapeOfEachPiece) {
    RngStream rng(1, 0);
    for (double lambda : {-0.5, -1.0, -2.0})
        for (int r = 0; r < 300; ++r) {
            const auto s = build_vervaat_bridge_neg(lambda, 256, rng);
            const auto& p = s.path;
            ASSERT_EQ(p.front(), 0.0);
            ASSERT_EQ(p.back(), lambda);
            ASSERT_GT(s.z, 0.0);
            ASSERT_LT(s.z, 1.0);
            for (std::size_t i = 1; i < 256; ++i) {
                if (p.time(i) < s.z) { ASSERT_GT(p.values[i], 0.0); }
                if (p.time(i) > s.z) { ASSERT_GT(p.values[i], lambda); }
            }
        }
    EXPECT_THROW(build_vervaat_bridge_neg(0.5, 16, rng), InvalidArgument);
}

TEST(BuildPos, ShapeOfEachPiece) {
    RngStream rng(2, 0);
    const double lambda = 1.0;
    for (int r = 0; r < 300; ++r) {
        const auto s = build_vervaat_bridge_pos(lambda, 256, rng);
        const auto& p = s.path;
        ASSERT_EQ(p.front(), 0.0);
        ASSERT_EQ(p.back(), lambda);
        for (std::size_t i = 1; i < 256; ++i) {
            if (p.time(i) < s.z) { ASSERT_GT(p.values[i], 0.0); }
            if (p.time(i) > s.z) { ASSERT_GT(p.values[i], lambda); }
        }
    }
    EXPECT_THROW(build_vervaat_bridge_pos(-1.0, 16, rng), InvalidArgument);
}

TEST(BuildNeg, Deterministic) {
    RngStream a(3, 5), b(3, 5);
    EXPECT_EQ(build_vervaat_bridge_neg(-1, 64, a).path.values, build_vervaat_bridge_neg(-1, 64, b).path.values);
}

TEST(BuildNeg, LatentZFollowsFz) {
    const auto z = map_replicas(20000, 4, [](std::size_t, RngStream& r) { return build_vervaat_bridge_neg(-1, 16, r).z; });
    EXPECT_TRUE(ks_one_sample(z, [](double t) { return fz_cdf(-1, t); }).pass);
}

TEST(BuildNeg, MarginalMatchesDirectTransform) {
    const std::size_t N = 512;
    const auto b = map_replicas(5000, 5, [&](std::size_t, RngStream& r) { return build_vervaat_bridge_neg(-1, N, r).path.value_at(0.5); });
    const auto d = map_replicas(5000, 6, [&](std::size_t, RngStream& r) { return direct_vervaat_bridge(-1, N, r).path.value_at(0.5); });
    EXPECT_TRUE(ks_two_sample(b, d).pass);
}

TEST(Direct, EndpointAndSplit) {
    RngStream rng(7, 0);
    for (int r = 0; r < 200; ++r) {
        const auto s = direct_vervaat_bridge(-0.8, 128, rng, {false});
        EXPECT_EQ(s.path.back(), -0.8);
        EXPECT_EQ(s.path.front(), 0.0);
        EXPECT_NEAR(s.a, 1.0 - double(s.split_index) / 128, 1e-15);
        for (double x : s.path.values) EXPECT_GE(x, -0.8);
        ASSERT_TRUE(s.hit_index.has_value());
    }
    EXPECT_THROW(direct_vervaat_bridge(0.0, 16, rng), InvalidArgument);
}

TEST(BuildVb, EndpointNormalAndFirstPieceNonNegative) {
    const auto ends = map_replicas(20000, 8, [](std::size_t, RngStream& r) {
        const auto s = build_vb(64, r);
        for (std::size_t i = 0; i <= 64; ++i)
            if (s.path.time(i) <= s.a) { EXPECT_GE(s.path.values[i], 0.0); }
        EXPECT_EQ(s.hit_index.has_value(), s.path.back() <= 0.0);
        EXPECT_EQ(s.branch, s.path.back() <= 0.0 ? 1 : 0);
        return s.path.back();
    });
    EXPECT_TRUE(ks_one_sample(ends, normal_cdf).pass);
}

TEST(BuildVb, SplitIsArcsine) {
    const auto a = map_replicas(20000, 9, [](std::size_t, RngStream& r) { return build_vb(8, r).a; });
    EXPECT_TRUE(ks_one_sample(a, [](double x) { return 2 / std::numbers::pi * std::asin(std::sqrt(x)); }).pass);
}

TEST(BuildVb, MeanMatchesClosedForm) {
    const auto v = map_replicas(20000, 10, [](std::size_t, RngStream& r) { return build_vb(64, r).path.value_at(0.5); });
    EXPECT_TRUE(moment_ztest(v, vb_moments(0.5).mean, Moment::mean).pass);
    EXPECT_TRUE(moment_ztest(v, vb_moments(0.5).second, Moment::second).pass);
}

TEST(AboveLine, Strict) {
    const GridPath p(1.0, {0, 0.5, -0.2, -1});
    EXPECT_TRUE(above_line(p, -1));
    EXPECT_FALSE(above_line(GridPath(1.0, {0, 0.5, -0.8, -1}), -1));
    EXPECT_FALSE(above_line(GridPath(1.0, {0, -0.5, -1}), -1));
}

TEST(StayAbove, IntervalProbability) {
    EXPECT_EQ(bessel3_bridge_stays_above(1, 1, 0, 0, 0.1), 1.0);
    EXPECT_EQ(bessel3_bridge_stays_above(1, 1, 1, 0.5, 0.1), 0.0);
    EXPECT_DOUBLE_EQ(bessel3_bridge_stays_above(1.0, 0.0, 0.25, 0.0, 0.1), 0.75);
    // Approaching x1 -> 0 along d1 = x1 recovers the last-interval limit.
    EXPECT_NEAR(bessel3_bridge_stays_above(1.0, 1e-7, 0.25, 0.0, 0.1), 0.75, 1e-5);
    // Far from the boundary relative to dt the crossing is negligible.
    EXPECT_NEAR(bessel3_bridge_stays_above(2, 2, 1, 1, 0.01), 1.0, 1e-12);
    const double p = bessel3_bridge_stays_above(1, 1.2, 0.5, 0.4, 0.3);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
}

TEST(StayAbove, EstimatorIsUnbiasedForMeanZ) {
    for (double lambda : {-0.5, -1.5}) {
        const auto w = map_replicas(20000, 11, [&](std::size_t, RngStream& r) {
            return stay_above_line_probability(build_vervaat_bridge_neg(lambda, 64, r), lambda, lambda);
        });
        EXPECT_TRUE(moment_ztest(w, mean_z(lambda), Moment::mean).pass) << lambda;
    }
}

TEST(StayAbove, EstimatorGivesSlopeCdf) {
    const double lambda = -1.0, a = -0.5;
    const auto w = map_replicas(20000, 12, [&](std::size_t, RngStream& r) {
        return stay_above_line_probability(build_vervaat_bridge_neg(lambda, 64, r), lambda, a, lambda - a);
    });
    EXPECT_TRUE(moment_ztest(w, slope_cdf(lambda, a), Moment::mean).pass);
}

TEST(StayAbove, RejectsLinesAboveZeroBeforeZ) {
    RngStream rng(13, 0);
    const auto s = build_vervaat_bridge_neg(-1, 32, rng);
    EXPECT_THROW(stay_above_line_probability(s, -1, -1, 0.1), InvalidArgument);
    DecompSample no_z;
    no_z.path = s.path;
    EXPECT_THROW(stay_above_line_probability(no_z, -1, -1), InvalidArgument);
}

TEST(Conditioned, StaysAboveAndCountsAttempts) {
    RngStream rng(14, 0);
    double attempts = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const auto s = conditioned_above_line(-1, 128, rng);
        EXPECT_TRUE(above_line(s.path, -1));
        EXPECT_GE(s.attempts, 1u);
        attempts += double(s.attempts);
    }
    // Geometric number of attempts with success probability E Z.
    EXPECT_NEAR(reps / attempts, mean_z(-1), 0.06);
}

TEST(Conditioned, StarvedSamplerThrows) {
    RngStream rng(15, 0);
    int thrown = 0;
    for (int r = 0; r < 20; ++r) {
        try {
            conditioned_above_line(-4, 16, rng, {1, true});
        } catch (const ResourceLimit&) {
            ++thrown;
        }
    }
    EXPECT_GT(thrown, 10);
}
