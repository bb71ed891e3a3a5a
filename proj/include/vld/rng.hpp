#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace vld {

// Deterministic splitmix64 generator. Identical sequences on every
// platform for a given seed, unlike std::shuffle / std::*_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). n must be > 0.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller.
    double next_gaussian();

    // Fisher-Yates with this generator.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = next_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// FNV-1a, used to derive per-id / per-text sub-seeds.
std::uint64_t hash64(std::string_view s);

}  // namespace vld
