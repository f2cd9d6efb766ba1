// Builds Vervaat bridges two ways and compares a few statistics with their
// closed forms.

#include <cstdio>

#include "vervaat/decomp.hpp"
#include "vervaat/hull.hpp"
#include "vervaat/laws.hpp"
#include "vervaat/parallel.hpp"
#include "vervaat/stats.hpp"

using namespace vervaat;

int main() {
    const double lambda = -1.0;
    const std::size_t N = 1024, R = 20000;
    const std::uint64_t seed = 42;

    // Excursion then first-passage bridge, versus the transform of a bridge.
    const auto built = map_replicas(R, seed, [&](std::size_t, RngStream& r) {
        return build_vervaat_bridge_neg(lambda, N, r);
    });
    const auto direct = map_replicas(R, seed, [&](std::size_t, RngStream& r) {
        return direct_vervaat_bridge(lambda, N, r).path.value_at(0.5);
    }, 1u << 20);

    std::vector<double> z, mid, above;
    for (const auto& s : built) {
        z.push_back(s.z);
        mid.push_back(s.path.value_at(0.5));
        above.push_back(stay_above_line_probability(s, lambda, lambda));
    }
    const auto zt = ks_one_sample(z, [&](double t) { return fz_cdf(lambda, t); });
    const auto mt = ks_two_sample(mid, direct);
    std::printf("split time vs closed-form law   D = %.4f  p = %.3f\n", zt.statistic, *zt.p_value);
    std::printf("value at t=1/2, built vs direct D = %.4f  p = %.3f\n", mt.statistic, *mt.p_value);

    double p = 0.0;
    for (double w : above) p += w;
    std::printf("P(stays above the chord)        %.4f  (closed form %.4f)\n", p / double(R), mean_z(lambda));

    RngStream rng(seed, 1u << 21);
    const auto m = convex_minorant(build_vervaat_bridge_neg(lambda, N, rng).path);
    std::printf("one path: %zu minorant segments, last slope %.4f\n", m.segment_count(), m.last_slope());
}
