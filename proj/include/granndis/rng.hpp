#pragma once

#include <cstdint>
#include <vector>

namespace granndis {

// Counter-based keyed RNG. A stream is fully determined by (seed, k1, k2),
// so draws for different keys are independent of call order and scheduling.

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class KeyedRng {
public:
    explicit KeyedRng(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0) noexcept {
        state_ = mix64(seed);
        state_ = mix64(state_ ^ (k1 + 0x9e3779b97f4a7c15ULL));
        state_ = mix64(state_ ^ (k2 + 0xc2b2ae3d27d4eb4fULL));
    }

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). n must be > 0. Lemire's multiply-shift reduction;
    // slight bias (< 2^-64 per draw) is irrelevant here, stability is not.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void keyed_shuffle(std::vector<T>& items, KeyedRng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace granndis
