#include <gtest/gtest.h>

#include <map>

#include "vervaat/lattice.hpp"

using namespace vervaat;

namespace {

Walk walk(std::initializer_list<int> s) { return Walk(std::vector<int>(s)); }

ExactPmf pmf(std::map<int, Rational> m) {
    ExactPmf p;
    for (auto& [l, q] : m) {
        p.support.push_back(l);
        p.masses.push_back(q);
    }
    return p;
}

}  // namespace

TEST(Enumerate, CountsSmallCases) {
    EXPECT_EQ(enumerate_bridges(2, -2).size(), 1u);
    EXPECT_EQ(enumerate_bridges(2, -2)[0], walk({-1, -1}));
    EXPECT_EQ(enumerate_bridges(3, -1).size(), 3u);
    EXPECT_EQ(enumerate_bridges(4, -2).size(), 4u);
}

TEST(Enumerate, CountIsBinomial) {
    for (int n = 1; n <= 12; ++n)
        for (int a = -n; a <= n; a += 2)
            EXPECT_EQ(BigInt(enumerate_bridges(n, a).size()), binomial(n, (n + a) / 2));
}

TEST(Enumerate, RejectsBadArguments) {
    EXPECT_THROW(enumerate_bridges(3, -2), InvalidArgument);
    EXPECT_THROW(enumerate_bridges(2, -4), InvalidArgument);
    EXPECT_THROW(enumerate_bridges(0, 0), InvalidArgument);
    EXPECT_THROW(enumerate_bridges(40, 0), ResourceLimit);
}

TEST(WalkType, RejectsBadSteps) {
    EXPECT_THROW(walk({1, 2}), InvalidArgument);
    EXPECT_THROW(Walk(std::vector<int>{}), InvalidArgument);
}

TEST(VervaatWalk, HandExamples) {
    auto r = vervaat_walk(walk({-1, -1}));
    EXPECT_EQ(r.walk, walk({-1, -1}));
    EXPECT_EQ(r.k, 0);

    r = vervaat_walk(walk({-1, 1}));
    EXPECT_EQ(r.walk.positions(), (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(r.k, 1);

    r = vervaat_walk(walk({-1, -1, 1, -1}));
    EXPECT_EQ(r.walk.positions(), (std::vector<int>{0, 1, 0, -1, -2}));
    EXPECT_EQ(r.k, 2);
}

TEST(VervaatWalk, PreservesEndpointAndIsIdempotentWhenMinAtEnd) {
    for (std::uint64_t b = 0; b < (1u << 10); ++b) {
        const Walk w = Walk::from_bits(b, 10);
        const auto v = vervaat_walk(w).walk;
        EXPECT_EQ(v.endpoint(), w.endpoint());
        const auto p = v.positions();
        EXPECT_GE(*std::min_element(p.begin(), p.end()), std::min(0, w.endpoint()));
        if (first_argmin(w.positions()) == 0) {
            EXPECT_EQ(v, w);
        }
    }
}

TEST(QuantileWalk, HandExamples) {
    EXPECT_EQ(quantile_walk(walk({1, 1})), walk({1, 1}));
    EXPECT_EQ(quantile_walk(walk({-1, 1})).positions(), (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(quantile_walk(walk({-1, -1})), walk({-1, -1}));
}

TEST(QuantileWalk, IsAPermutationOfIncrements) {
    for (std::uint64_t b = 0; b < (1u << 9); ++b) {
        const Walk w = Walk::from_bits(b, 9);
        EXPECT_EQ(quantile_walk(w).endpoint(), w.endpoint());
    }
}

TEST(ZPmf, SpecExamples) {
    EXPECT_EQ(z_pmf(2, -2), pmf({{1, 1}}));
    EXPECT_EQ(z_pmf(4, -2), pmf({{1, Rational(1, 4)}, {3, Rational(3, 4)}}));
}

TEST(ZPmf, BruteForceOracle) {
    EXPECT_EQ(z_pmf(6, -2), pmf({{1, Rational(2, 15)}, {3, Rational(1, 5)}, {5, Rational(2, 3)}}));
    EXPECT_EQ(z_pmf(8, -4), pmf({{1, Rational(9, 28)}, {3, Rational(9, 28)}, {5, Rational(5, 14)}}));
    EXPECT_EQ(z_pmf(9, -1), pmf({{9, 1}}));
}

TEST(ZPmf, MatchesEnumerationAndSumsToOne) {
    for (int n = 1; n <= 14; ++n)
        for (int a = -n; a < 0; a += 2) {
            const auto p = z_pmf(n, a);
            EXPECT_EQ(p.total(), Rational(1)) << n << " " << a;
            EXPECT_EQ(p, z_pmf_enumerated(n, a)) << n << " " << a;
        }
}

TEST(ZPmf, RejectsNonNegativeEndpoint) {
    EXPECT_THROW(z_pmf(4, 0), InvalidArgument);
    EXPECT_THROW(z_pmf(4, -3), InvalidArgument);
}

TEST(FirstPassage, CountsAndBruteForce) {
    EXPECT_EQ(count_first_passage(1), 1);
    EXPECT_EQ(count_first_passage(3), 1);
    EXPECT_EQ(count_first_passage(5), 2);
    for (int l = 1; l <= 15; l += 2) {
        long c = 0;
        for (std::uint64_t b = 0; b < (std::uint64_t(1) << l); ++b)
            if (first_visit(Walk::from_bits(b, l), -1) == l) ++c;
        EXPECT_EQ(count_first_passage(l), c) << l;
    }
    EXPECT_THROW(count_first_passage(4), InvalidArgument);
    EXPECT_THROW(count_first_passage(-1), InvalidArgument);
}

TEST(Verify, Bijection) {
    EXPECT_TRUE(verify_bijection(4, -2).pass);
    EXPECT_TRUE(verify_bijection(6, -2).pass);
    EXPECT_TRUE(verify_bijection(5, -1).pass);
    for (int n = 1; n <= 12; ++n)
        for (int a = -n; a < 0; a += 2) EXPECT_TRUE(verify_bijection(n, a).pass) << n << " " << a;
    EXPECT_THROW(verify_bijection(20, -2), ResourceLimit);
}

TEST(Verify, HelperUniform) {
    // Path 0,1,0,-1,-2 has K in {0,1,2}.
    std::vector<int> ks;
    for (const auto& w : enumerate_bridges(4, -2)) {
        const auto r = vervaat_walk(w);
        if (r.walk.positions() == std::vector<int>{0, 1, 0, -1, -2}) ks.push_back(r.k);
    }
    std::sort(ks.begin(), ks.end());
    EXPECT_EQ(ks, (std::vector<int>{0, 1, 2}));
    for (int n = 1; n <= 12; ++n)
        for (int a = -n; a < 0; a += 2) EXPECT_TRUE(verify_helper_uniform(n, a).pass) << n << " " << a;
}

TEST(Verify, QEqualsV) {
    for (int n = 1; n <= 10; ++n) EXPECT_TRUE(verify_q_equals_v(n).pass) << n;
    EXPECT_THROW(verify_q_equals_v(30), ResourceLimit);
}

TEST(Verify, TwoStepMultiset) {
    std::multiset<std::uint64_t> q, v;
    for (std::uint64_t b = 0; b < 4; ++b) {
        q.insert(quantile_walk(Walk::from_bits(b, 2)).to_bits());
        v.insert(vervaat_walk(Walk::from_bits(b, 2)).walk.to_bits());
    }
    const std::multiset<std::uint64_t> expect{0b11, 0b01, 0b01, 0b00};  // UU, UD, UD, DD
    EXPECT_EQ(q, expect);
    EXPECT_EQ(v, expect);
}

TEST(SampleBridgeWalk, EndsAtTargetAndIsDeterministic) {
    RngStream a(5, 1), b(5, 1);
    for (int i = 0; i < 200; ++i) {
        const auto w = sample_bridge_walk(11, -3, a);
        EXPECT_EQ(w.endpoint(), -3);
        EXPECT_EQ(w, sample_bridge_walk(11, -3, b));
    }
}

TEST(SampleBridgeWalk, UniformOverBridges) {
    RngStream rng(11, 0);
    std::map<std::uint64_t, int> counts;
    const int reps = 40000;
    for (int i = 0; i < reps; ++i) ++counts[sample_bridge_walk(6, -2, rng).to_bits()];
    ASSERT_EQ(counts.size(), 15u);
    std::vector<double> obs, expd;
    for (auto& [b, c] : counts) {
        obs.push_back(c);
        expd.push_back(reps / 15.0);
    }
    EXPECT_TRUE(chi_square(obs, expd).pass);
}
