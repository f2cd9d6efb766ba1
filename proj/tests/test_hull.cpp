#include <gtest/gtest.h>

#include "vervaat/decomp.hpp"
#include "vervaat/hull.hpp"

using namespace vervaat;

TEST(Minorant, ConcaveArchIsOneSegment) {
    const GridPath p(1.0, {0, 0.6, 0.8, 0.6, 0});
    const auto m = convex_minorant(p);
    ASSERT_EQ(m.vertices.size(), 2u);
    EXPECT_EQ(segment_count(m), 1u);
    EXPECT_EQ(last_slope(m), 0.0);
}

TEST(Minorant, HandComputedVertices) {
    const GridPath p(1.0, {0, 1, -1, 0});
    const auto m = convex_minorant(p);
    ASSERT_EQ(m.vertices.size(), 3u);
    EXPECT_DOUBLE_EQ(m.vertices[0].t, 0.0);
    EXPECT_DOUBLE_EQ(m.vertices[1].t, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.vertices[2].t, 1.0);
    EXPECT_DOUBLE_EQ(m.last_slope(), 3.0);
    EXPECT_DOUBLE_EQ(m.value_at(1.0 / 3.0), -0.5);
}

TEST(Minorant, CollinearPointsMerged) {
    const GridPath p(1.0, {0, -1, -2, -3, -4});
    const auto m = convex_minorant(p);
    EXPECT_EQ(m.vertices.size(), 2u);
    EXPECT_DOUBLE_EQ(m.last_slope(), -4.0);
}

TEST(Minorant, ConvexLowerBoundAndIdempotent) {
    RngStream rng(1, 0);
    for (int r = 0; r < 200; ++r) {
        const auto s = build_vervaat_bridge_neg(-1, 512, rng);
        const auto m = convex_minorant(s.path);
        for (std::size_t i = 0; i <= 512; ++i) EXPECT_LE(m.value_at(s.path.time(i)), s.path.values[i] + 1e-12);
        for (std::size_t k = 1; k < m.segment_count(); ++k) EXPECT_GT(m.slope(k), m.slope(k - 1));
        const auto again = convex_minorant(minorant_path(m, s.path));
        ASSERT_EQ(again.vertices.size(), m.vertices.size());
        for (std::size_t k = 0; k < m.vertices.size(); ++k) {
            EXPECT_DOUBLE_EQ(again.vertices[k].t, m.vertices[k].t);
            EXPECT_NEAR(again.vertices[k].x, m.vertices[k].x, 1e-12);
        }
    }
}

TEST(Minorant, LastSlopeAtLeastChordSlope) {
    RngStream rng(2, 0);
    for (double lambda : {-0.5, -1.0, -2.0})
        for (int r = 0; r < 300; ++r) {
            const auto s = build_vervaat_bridge_neg(lambda, 256, rng);
            const auto m = convex_minorant(s.path);
            EXPECT_GE(m.last_slope(), lambda - 1e-12);
            // One segment exactly when the path stays above the chord.
            EXPECT_EQ(m.segment_count() == 1, above_line(s.path, lambda));
            if (m.segment_count() == 1) { EXPECT_DOUBLE_EQ(m.last_slope(), lambda); }
        }
}

TEST(Minorant, ValueAtOutsideRangeThrows) {
    const auto m = convex_minorant(GridPath(1.0, {0, 1}));
    EXPECT_THROW(m.value_at(1.5), InvalidArgument);
}
