#pragma once

#include <complex>
#include <vector>

#include "relayim/rng.hpp"

namespace relayim {

using cdouble = std::complex<double>;

// Frequency-domain channel of one hop: i.i.d. unit-power Rayleigh small-scale
// coefficients times the free-space amplitude factor distance^(-alpha/2).
struct HopChannel {
    std::vector<std::complex<double>> gains;
    double distance = 1.0;
    double path_loss_exponent = 2.0;
};

// Additive white Gaussian noise, variance per complex sample.
struct NoiseModel {
    double variance = 1.0;
};

// Draws one block-fading realization: h[n] i.i.d. CN(0, 1), independent
// across subcarriers and across calls, scaled by the path-loss factor.
HopChannel sample_hop(RandomStream& rng, int n_subcarriers, double distance, double alpha);

// y[n] = gains[n] x[n] + w[n] with w[n] i.i.d. CN(0, variance). A zero
// variance yields the noiseless limit (and still consumes the same draws).
std::vector<std::complex<double>> transmit(const std::vector<std::complex<double>>& amplitudes,
                                           const HopChannel& hop, const NoiseModel& noise,
                                           RandomStream& rng);

}  // namespace relayim
