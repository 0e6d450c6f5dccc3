#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace conflab {

/// Identity string of the generator, recorded in every experiment result.
inline constexpr std::string_view kGeneratorId = "xoshiro256**/splitmix64-v1";

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    std::uint64_t s = x;
    return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Seeded random stream identified by (master seed, stream id).
///
/// The pair is hashed into a splitmix64 sequence that seeds a xoshiro256**
/// state, so every (seed, id) pair selects its own sequence and the same pair
/// always reproduces it bit for bit. Substreams hash a child index into the
/// stream id; experiment drivers use one substream per trial.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : seed_(master_seed), id_(stream_id) {
        std::uint64_t sm = detail::mix64(master_seed) ^
                           detail::mix64(stream_id ^ 0xD1B54A32D192ED03ULL);
        for (auto& w : s_) w = detail::splitmix64(sm);
    }

    [[nodiscard]] std::uint64_t master_seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return id_; }

    /// Independent child stream; deterministic in (seed, id, child).
    [[nodiscard]] RngStream substream(std::uint64_t child) const noexcept {
        return RngStream(seed_, detail::mix64(id_ * 0x9E3779B97F4A7C15ULL + child + 1));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    result_type operator()() noexcept { return next(); }

    std::uint64_t next() noexcept {
        const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift, rejection free
    /// bias below 2^-32 for the small n used here).
    std::uint32_t below(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(((next() >> 32) * static_cast<std::uint64_t>(n)) >> 32);
    }

    /// Standard normal via the Marsaglia polar method; spare value cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace conflab
