#pragma once

#include <cmath>
#include <cstdint>

namespace allocsim {

// splitmix64 finalizer. Expands one scenario seed into independent substream
// seeds so that adding a stream never perturbs the others.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// xoshiro256++ with hand-rolled draws. Self-contained so streams are
// bit-reproducible for a given seed regardless of standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x = mix64(x);
            word = x;
        }
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // uniform integer on [0, n); n must be positive
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v = next_u64();
        while (v >= limit) {
            v = next_u64();
        }
        return v % n;
    }

    double exponential(double mean) noexcept { return -mean * std::log(uniform_pos()); }

    double normal(double mean, double sigma) noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * radius * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
};

inline Rng substream(std::uint64_t seed, std::uint64_t salt) noexcept {
    return Rng(mix64(seed ^ mix64(salt)));
}

// Seed for replication `rep` of a sweep point. Pure function of (seed, rep):
// extending the replication count never changes earlier replications.
inline std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t rep) noexcept {
    return mix64(seed ^ mix64(0x5eedb10c0000ULL + rep));
}

}  // namespace allocsim
