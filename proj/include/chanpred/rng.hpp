// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reproducible random streams.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The distribution adapters below are written out explicitly because
// the standard library's distributions are implementation-defined, so traces
// would otherwise differ between libstdc++ and libc++.
//
// Stream version: chanpred-rng/1
//   uniform()  = (engine() >> 11) * 2^-53                     in [0, 1)
//   normal()   = Box-Muller, both outputs used (cos first, then sin)
//   index(n)   = engine() % n
//   mix64      = SplitMix64 finalizer
//   derive_seed(s, tag) = mix64(s ^ mix64(tag))

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace chanpred {

inline constexpr const char* rng_stream_version = "chanpred-rng/1";

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(seed ^ mix64(tag));
}

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) noexcept {
    return derive_seed(derive_seed(seed, tag), static_cast<std::uint64_t>(rest)...);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t index(std::uint64_t n) { return engine_() % n; }

    template <typename Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace chanpred
