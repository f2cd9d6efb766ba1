#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace vervaat {

// Philox-4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Counter-based stream. (seed, stream) names an independent sequence; the n-th
// draw depends only on (seed, stream, n), so replicas can run in any order.
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    result_type operator()() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    // Uniform on the open interval (0,1), 53-bit resolution.
    double uniform() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    // Standard normal via Box-Muller; both variates of a pair are used.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential() { return -std::log(uniform()); }

private:
    void refill() {
        const std::array<std::uint32_t, 4> c = {
            std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
            std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
        const auto out = philox4x32(c, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
        ++counter_;
        buf_[1] = (std::uint64_t(out[1]) << 32) | out[0];
        buf_[0] = (std::uint64_t(out[3]) << 32) | out[2];
        have_ = 2;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace vervaat
