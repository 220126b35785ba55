#include "relayim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace relayim {

HopChannel sample_hop(RandomStream& rng, int n_subcarriers, double distance, double alpha) {
    if (!(distance > 0.0)) {
        throw std::invalid_argument("hop distance must be positive");
    }
    if (n_subcarriers < 1) {
        throw std::invalid_argument("need at least one subcarrier");
    }
    HopChannel hop;
    hop.distance = distance;
    hop.path_loss_exponent = alpha;
    hop.gains.resize(static_cast<std::size_t>(n_subcarriers));
    const double amplitude_factor = std::pow(distance, -0.5 * alpha);
    for (auto& g : hop.gains) {
        g = amplitude_factor * rng.next_cgauss(1.0);
    }
    return hop;
}

std::vector<std::complex<double>> transmit(const std::vector<std::complex<double>>& amplitudes,
                                           const HopChannel& hop, const NoiseModel& noise,
                                           RandomStream& rng) {
    if (amplitudes.size() != hop.gains.size()) {
        throw std::invalid_argument("block length does not match channel length");
    }
    if (noise.variance < 0.0) {
        throw std::invalid_argument("noise variance must be non-negative");
    }
    std::vector<std::complex<double>> received(amplitudes.size());
    for (std::size_t n = 0; n < amplitudes.size(); ++n) {
        received[n] = hop.gains[n] * amplitudes[n] + rng.next_cgauss(noise.variance);
    }
    return received;
}

}  // namespace relayim
