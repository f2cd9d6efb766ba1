#include <gtest/gtest.h>

#include "vervaat/laws.hpp"
#include "vervaat/parallel.hpp"

using namespace vervaat;

// Reference values come from tests/oracles/oracles.py (mpmath, defining integrals).

TEST(Kernels, Values) {
    EXPECT_NEAR(kernels(Kernel::heat, 1, 0, 0), 0.3989422804014327, 1e-15);
    EXPECT_NEAR(kernels(Kernel::fp, 1, 0, -1), 0.24197072451914337, 1e-15);
    EXPECT_NEAR(kernels(Kernel::bessel, 1, 0, 0), 0.7978845608028654, 1e-15);
    // q~_t(0,y) = (2/y) g_t(y)
    EXPECT_NEAR(bessel_kernel(0.7, 0, 1.3), 2.0 / 1.3 * fp_kernel(0.7, 1.3), 1e-15);
    // continuity in x at 0
    EXPECT_NEAR(bessel_kernel(0.7, 1e-9, 1.3), bessel_kernel(0.7, 0, 1.3), 1e-8);
    EXPECT_THROW(heat_kernel(0, 0, 0), InvalidArgument);
    EXPECT_THROW(bessel_kernel(1, -1, 0), InvalidArgument);
}

TEST(Kernels, BesselTransitionIsADensity) {
    for (double x : {0.0, 0.4, 2.0}) {
        const double m = integrate_to_inf([&](double y) { return y > 40 ? 0.0 : bessel_kernel(0.8, x, y) * y * y; }, 0.0);
        EXPECT_NEAR(m, 1.0, 1e-9) << x;
    }
}

TEST(Fz, PdfAndCdf) {
    EXPECT_NEAR(fz_pdf(-1, 0.5), 0.9678828980765734, 1e-13);
    EXPECT_NEAR(fz_cdf(-1, 0.25), 0.43629713834922697, 1e-13);
    EXPECT_NEAR(fz_cdf(-1, 0.5), 0.68268949213708589, 1e-13);
    EXPECT_NEAR(fz_cdf(-2, 0.3), 0.80956973617447586, 1e-13);
    EXPECT_NEAR(fz_cdf(-0.5, 0.7), 0.55499128125326396, 1e-13);
    for (double l : {-0.3, -1.0, -2.5})
        EXPECT_NEAR(integrate([&](double t) { return fz_pdf(l, t); }, 0, 1, {1e-12, 15}), 1.0, 1e-8) << l;
    EXPECT_THROW(fz(0.0), InvalidArgument);
    EXPECT_THROW(fz(0.5), InvalidArgument);
}

TEST(Fz, CdfMatchesQuadratureOfPdf) {
    for (double t : {0.1, 0.5, 0.9})
        EXPECT_NEAR(integrate([](double s) { return fz_pdf(-1.5, s); }, 0, t, {1e-12, 15}), fz_cdf(-1.5, t), 1e-10);
}

TEST(MeanZ, Values) {
    EXPECT_NEAR(mean_z(-0.5), 0.56181777177315383, 1e-12);
    EXPECT_NEAR(mean_z(-1), 0.34432045758120153, 1e-12);
    EXPECT_NEAR(mean_z(-2), 0.15726154142389105, 1e-12);
    EXPECT_NEAR(mean_z(-1e-9), 1.0, 1e-8);
    EXPECT_NEAR(mean_z(-30), 1.0 / 900 - 3.0 / 810000 + 15.0 / 729e6, 1e-9);  // asymptotic series
    EXPECT_THROW(mean_z(0.0), InvalidArgument);
}

TEST(StayAbove, EqualsMeanZ) {
    EXPECT_DOUBLE_EQ(stay_above_prob(-1), mean_z(-1));
    const double q = integrate([](double t) { return t * fz_pdf(-3, t); }, 0, 1, {1e-13, 15});
    EXPECT_NEAR(stay_above_prob(-3), q, 1e-8);
    EXPECT_NEAR(stay_above_prob(-1e-9), 1.0, 1e-8);
}

TEST(SlopeCdf, Values) {
    EXPECT_DOUBLE_EQ(slope_cdf(-1, 0), 1.0);
    EXPECT_NEAR(slope_cdf(-1, -1), mean_z(-1), 1e-14);
    EXPECT_NEAR(slope_cdf(-1, -0.75), 0.50824034318590114, 1e-12);
    EXPECT_NEAR(slope_cdf(-1, -0.5), 0.67216022879060076, 1e-12);
    EXPECT_NEAR(slope_cdf(-1, -0.25), 0.83608011439530038, 1e-12);
    EXPECT_THROW(slope_cdf(-1, 0.1), InvalidArgument);
    EXPECT_THROW(slope_cdf(-1, -1.1), InvalidArgument);
}

TEST(Fa, PdfCdfAndMean) {
    EXPECT_NEAR(fa_pdf(-1, 0.2), 1.4082613070571979, 1e-12);
    EXPECT_NEAR(fa_pdf(-1, 0.5), 0.4839414490382867, 1e-12);
    EXPECT_NEAR(fa_cdf(-1, 0.3), 0.78242106049170584, 1e-12);
    const Quadrature q{1e-12, 15};
    for (double l : {-0.5, -1.0, -2.0}) {
        EXPECT_NEAR(integrate([&](double a) { return fa_pdf(l, a); }, 0, 1, q), 1.0, 1e-6);
        EXPECT_NEAR(integrate([&](double a) { return a * fa_pdf(l, a); }, 0, 1, q), 0.5 * mean_z(l), 1e-6);
    }
    EXPECT_LT(fa_pdf(-1, 1 - 1e-9), 1e-6);
    EXPECT_EQ(fa_pdf(-1, 1.0), 0.0);
}

TEST(Fztilde, PdfCdfAndNormalization) {
    const auto law = fztilde(-1);
    EXPECT_NEAR(law.pdf(0.5), 1.4054972290577831, 1e-12);
    EXPECT_NEAR(law.cdf(0.5), 0.38056685605879474, 1e-10);
    EXPECT_NEAR(integrate(law.pdf, 0, 1, {1e-12, 15}), 1.0, 1e-8);
}

TEST(Meander, Moments) {
    const auto m1 = meander_moments(1);
    EXPECT_NEAR(m1.mean, std::sqrt(std::numbers::pi / 2), 1e-14);
    EXPECT_DOUBLE_EQ(m1.second, 2.0);
    EXPECT_DOUBLE_EQ(m1.cross, 2.0);
    const auto m0 = meander_moments(0);
    EXPECT_EQ(m0.mean, 0.0);
    EXPECT_EQ(m0.second, 0.0);
    EXPECT_EQ(m0.cross, 0.0);
    EXPECT_DOUBLE_EQ(meander_moments(0.25).second, 0.6875);
}

TEST(Meander, Marginal) {
    EXPECT_NEAR(meander_cdf(0.5, 1.0), 0.51607614148775911, 1e-12);
    EXPECT_NEAR(meander_cdf(0.25, 0.6), 0.3361201566916327, 1e-12);
    const Quadrature q{1e-12, 15};
    for (double t : {0.25, 0.5, 0.9, 1.0}) {
        const auto law = meander_marginal(t);
        EXPECT_NEAR(integrate(law.pdf, 0, 40, q), 1.0, 1e-8) << t;
        EXPECT_NEAR(integrate([&](double x) { return x * law.pdf(x); }, 0, 40, q), meander_moments(t).mean, 1e-6) << t;
        EXPECT_NEAR(integrate([&](double x) { return x * x * law.pdf(x); }, 0, 40, q), meander_moments(t).second, 1e-6) << t;
    }
    EXPECT_NEAR(meander_pdf(1, 0.8), 0.8 * std::exp(-0.32), 1e-15);
    EXPECT_THROW(meander_marginal(0), InvalidArgument);
}

TEST(VbMoments, ValuesAndSplitIdentities) {
    const auto m1 = vb_moments(1);
    EXPECT_NEAR(m1.mean, 0.0, 1e-15);
    EXPECT_NEAR(m1.second, 1.0, 1e-15);
    const auto h = vb_moments(0.5);
    EXPECT_NEAR(h.mean, 0.66098921258529444, 1e-13);
    EXPECT_NEAR(h.second, 0.8633802276324186, 1e-12);
    const auto z = vb_moments(0);
    for (double v : {z.mean, z.second, z.mean_a_gt, z.mean_a_le, z.second_a_gt, z.second_a_le}) EXPECT_NEAR(v, 0.0, 1e-15);
    for (int i = 0; i <= 100; ++i) {
        const auto m = vb_moments(i / 100.0);
        EXPECT_NEAR(m.mean_a_gt + m.mean_a_le, m.mean, 1e-10);
        EXPECT_NEAR(m.second_a_gt + m.second_a_le, m.second, 1e-10);
    }
    EXPECT_THROW(vb_moments(1.5), InvalidArgument);
}

TEST(EndGivenT0, RayleighLaw) {
    const auto law = end_given_t0(0.4);
    const Quadrature q{1e-12, 15};
    EXPECT_NEAR(integrate(law.pdf, -30, 0, q), 1.0, 1e-10);
    EXPECT_NEAR(integrate([&](double l) { return l * law.pdf(l); }, -30, 0, q), -std::sqrt(std::numbers::pi * 0.6 / 2), 1e-10);
    EXPECT_NEAR(law.cdf(-1e-12), 1.0, 1e-9);
    EXPECT_LT(end_given_t0(1 - 1e-8).cdf(-1e-3), 1e-10);
    EXPECT_THROW(end_given_t0(1.0), InvalidArgument);
}

TEST(NonMarkov, RatioProportionalToT) {
    const NonMarkovDensities d(0.3, 0.5, -1);
    const Quadrature q{1e-12, 15};
    EXPECT_NEAR(integrate([&](double t) { return d.f1(t); }, 0.3, 1, q), 1.0, 1e-8);
    EXPECT_NEAR(integrate([&](double t) { return d.f2(t); }, 0.3, 1, q), 1.0, 1e-8);
    const double c = d.ratio(0.4) / 0.4;
    for (double t : {0.35, 0.5, 0.7, 0.9, 0.99}) EXPECT_NEAR(d.ratio(t) / t, c, 1e-6 * c) << t;
    EXPECT_EQ(d.f1(0.2), 0.0);
    EXPECT_EQ(d.f2(0.3), 0.0);
    EXPECT_THROW(nonmarkov_ratio(0.2, 0.3, 0.5, -1), InvalidArgument);
    EXPECT_THROW(NonMarkovDensities(0.3, -0.5, -1), InvalidArgument);
}

TEST(Identities, QuadratureChecks) {
    EXPECT_NEAR(erfc_kernel_rhs(0.4, 0), std::numbers::pi, 1e-15);
    EXPECT_NEAR(identity_52(1), (1 + std::numbers::pi / 2) / (4 * std::sqrt(std::numbers::pi)), 1e-15);
    EXPECT_NEAR(identity_52(1), 0.3626, 1e-4);
    EXPECT_NEAR(identity_54(1), 5 / (8 * std::sqrt(2.0)), 1e-15);
    for (const auto& r : identity_checks()) EXPECT_TRUE(r.pass) << r.name << " " << r.notes;
}

struct LawCase {
    const char* name;
    ClosedFormLaw law;
};

class ClosedFormLawProps : public testing::TestWithParam<int> {};

static std::vector<LawCase> law_cases() {
    return {{"fz-1", fz(-1)}, {"fz-2.5", fz(-2.5)}, {"fz_hat", fz_hat(1)}, {"fa", fa(-1)},
            {"fztilde", fztilde(-1)}, {"end_given_t0", end_given_t0(0.3)}};
}

TEST_P(ClosedFormLawProps, DensityCdfAndSampler) {
    const auto c = law_cases()[GetParam()];
    const auto& law = c.law;
    const double lo = std::isfinite(law.lo) ? law.lo : -30, hi = std::isfinite(law.hi) ? law.hi : 30;
    for (int i = 1; i < 50; ++i) EXPECT_GE(law.pdf(lo + (hi - lo) * i / 50), 0.0);
    EXPECT_NEAR(law.cdf(hi), 1.0, 1e-8) << c.name;
    for (int i = 1; i < 10; ++i) EXPECT_LE(law.cdf(lo + (hi - lo) * (i - 1) / 10), law.cdf(lo + (hi - lo) * i / 10));
    ASSERT_TRUE(law.sampler);
    const auto xs = map_replicas(100000, 31 + GetParam(), [&](std::size_t, RngStream& r) { return law.sampler(r); });
    EXPECT_TRUE(ks_one_sample(xs, law.cdf).pass) << c.name;
}

INSTANTIATE_TEST_SUITE_P(Laws, ClosedFormLawProps, testing::Range(0, 6));
