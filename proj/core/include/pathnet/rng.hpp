#pragma once

#include <cstdint>

namespace pathnet {

/// Deterministic 64-bit generator (SplitMix64). One fixed algorithm for
/// every stochastic operation in the library so that a (seed, config)
/// pair reproduces a run bit-for-bit on any platform. State is a single
/// u64, which keeps checkpointing trivial.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n), n >= 1. Multiply-shift reduction.
    std::uint64_t next_below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per
    /// call (no cached spare, so the state alone captures the stream).
    double normal() noexcept;

    /// Independent derived stream; does not advance this generator.
    Rng split(std::uint64_t stream) const noexcept;

    std::uint64_t state() const noexcept { return state_; }
    void set_state(std::uint64_t s) noexcept { state_ = s; }

private:
    std::uint64_t state_;
};

/// Stream derivation used everywhere we need decoupled sub-streams
/// (stage seeds, scratch baselines). Pure function of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace pathnet
