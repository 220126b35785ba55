#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace relayim {

// SplitMix64 finalizer. Bijective on 64-bit words; used for seeding and for
// deriving independent per-trial streams from a (seed, point, trial) key.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ generator with counter-based stream derivation. A Monte Carlo
// trial owns one stream, keyed on (master_seed, point, trial), so the draws a
// trial sees never depend on worker count or scheduling order.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) noexcept;

    static RandomStream for_trial(std::uint64_t master_seed, std::uint64_t point,
                                  std::uint64_t trial) noexcept {
        return RandomStream(mix64(mix64(master_seed ^ 0x8badf00d5eedc0deULL) ^ point) ^ trial);
    }

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Circularly symmetric complex Gaussian, E|z|^2 = variance
    // (real and imaginary parts each N(0, variance/2)).
    std::complex<double> next_cgauss(double variance) noexcept;

private:
    std::uint64_t state_[4];
};

// `count` equiprobable bits, one per element (values 0/1).
std::vector<std::uint8_t> random_bits(RandomStream& rng, int count);

}  // namespace relayim
