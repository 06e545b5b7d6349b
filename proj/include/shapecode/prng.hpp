#pragma once

// Platform-independent PRNG: xoshiro256** whose 256-bit state is expanded
// from a single 64-bit seed with splitmix64.

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>

namespace shapecode {

class Prng {
public:
    explicit Prng(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Unbiased integer in [lo, hi]: rejects draws at or above the largest
    /// multiple of the span not exceeding 2^64.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        using u128 = unsigned __int128;
        const u128 span = static_cast<u128>(static_cast<std::uint64_t>(hi - lo)) + 1;
        const u128 limit = ((u128{1} << 64) / span) * span;
        std::uint64_t u;
        do {
            u = next_u64();
        } while (static_cast<u128>(u) >= limit);
        return lo + static_cast<std::int64_t>(static_cast<u128>(u) % span);
    }

    /// True with probability `prob`; always consumes exactly one draw.
    bool bernoulli(double prob) noexcept {
        const std::uint64_t u = next_u64();
        return static_cast<double>(u >> 11) * 0x1.0p-53 < prob;
    }

    [[nodiscard]] const std::array<std::uint64_t, 4>& state() const noexcept { return state_; }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) noexcept {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace shapecode
