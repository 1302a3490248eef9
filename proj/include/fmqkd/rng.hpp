#pragma once

#include <cmath>
#include <cstdint>

namespace fmqkd {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// SplitMix64 finalizer; bijective with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Independent substreams used by the simulator.
enum class RngStream : std::uint64_t {
    rounds = 1,  // source choices, modulator jitter, detector sampling
    phase = 2,   // laser phase-diffusion increments
};

// Deterministic SplitMix64 stream keyed by (seed, stream tag, block index).
// Any block of any stream can be regenerated in isolation, which is what
// makes block-parallel simulation reproducible regardless of worker count
// and scheduling order.
class Prng {
public:
    Prng(std::uint64_t seed, RngStream stream, std::uint64_t block) noexcept
        : state_(derive(seed, static_cast<std::uint64_t>(stream), block)) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform on [0, 1), 53-bit resolution
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform on (0, 1]; safe as a log() argument
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // uniform integer in [0, n); bias is O(n / 2^64)
    std::uint32_t below(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // standard normal via Box-Muller; consumes exactly two draws
    double gaussian() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

private:
    static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                                          std::uint64_t block) noexcept {
        std::uint64_t k = mix64(seed + 0x632be59bd9b4e019ULL);
        k = mix64(k ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
        k = mix64(k ^ mix64(block + 0xd1b54a32d192ed03ULL));
        return k;
    }

    std::uint64_t state_;
};

}  // namespace fmqkd
