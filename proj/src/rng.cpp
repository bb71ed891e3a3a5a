#include "vld/rng.hpp"

#include <cmath>
#include <numbers>

namespace vld {

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 in (0,1] so log() is finite.
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t hash64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace vld
