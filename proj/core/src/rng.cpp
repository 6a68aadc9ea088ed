#include "pathnet/rng.hpp"

#include <cmath>
#include <numbers>

namespace pathnet {

double Rng::normal() noexcept {
    // u1 in (0,1] so log() stays finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    // Finalizer of the generator applied to a keyed offset: distinct streams
    // land in unrelated regions of the sequence space.
    std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng Rng::split(std::uint64_t stream) const noexcept { return Rng(derive_seed(state_, stream)); }

}  // namespace pathnet
