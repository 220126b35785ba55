#include "relayim/rng.hpp"

#include <cmath>
#include <numbers>

namespace relayim {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) noexcept {
    // SplitMix64 sequence fills the state; never leaves it all-zero.
    std::uint64_t z = seed;
    for (auto& word : state_) {
        word = mix64(z);
        z = word;
    }
}

std::uint64_t RandomStream::next_u64() noexcept {
    // xoshiro256++
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

std::complex<double> RandomStream::next_cgauss(double variance) noexcept {
    // Box-Muller in polar form: sqrt(-v ln u1) * exp(j 2 pi u2) is CN(0, v).
    // u1 is mapped into (0, 1] so the log stays finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-variance * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::vector<std::uint8_t> random_bits(RandomStream& rng, int count) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(count));
    std::uint64_t word = 0;
    for (int i = 0; i < count; ++i) {
        if (i % 64 == 0) word = rng.next_u64();
        bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return bits;
}

}  // namespace relayim
