// SPDX-License-Identifier: Apache-2.0
//
// csfb - compressive-sensing differential channel feedback simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef CSFB_CHANNEL_HPP
#define CSFB_CHANNEL_HPP

#include "csfb/errors.hpp"
#include "csfb/numerics.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace csfb {

// Probability that an inactive tap becomes active, given the steady-state
// activity mu and the death probability p01. Throws ParameterError when
// mu is outside (0, 1) or the result exceeds 1.
double derive_p10(double mu, double p01);

// Generative parameters of the time-varying sparse CIR.
// Construct through make(); rho is derived from the Doppler spread and cached.
struct ChannelParams {
    std::size_t taps = 200;    // L
    double mu = 0.1;           // steady-state Pr{tap active}
    double p01 = 0.05;         // Pr{active -> inactive}
    double doppler_hz = 10.0;  // maximal Doppler frequency
    double slot_s = 1e-3;      // slot duration
    double sigma_w = 1.0;      // AR(1) innovation standard deviation
    double rho = 0.0;          // J0(2 pi f_d tau)

    static ChannelParams make(std::size_t taps, double mu, double p01, double doppler_hz, double slot_s,
                              double sigma_w);

    double p10() const { return derive_p10(mu, p01); }

    // Re-checks every invariant, including the cached rho.
    void validate() const;
};

using SupportVector = std::vector<std::uint8_t>;

struct ChannelState {
    SupportVector support;   // p(l) in {0, 1}
    ComplexVector amplitude; // a(l), evolved on every tap
};

ChannelState init_state(const ChannelParams& params, RngStream& rng);

SupportVector evolve_support(std::span<const std::uint8_t> support, const ChannelParams& params, RngStream& rng);

// rho * a + sqrt(1 - rho^2) * w, w ~ CN(0, sigma_w^2)
ComplexVector evolve_amplitude(const ComplexVector& amplitude, const ChannelParams& params, RngStream& rng);

// One slot of evolution. Support and amplitude draw from separate
// sub-streams of `slot_rng`, so the result depends only on the stream identity.
ChannelState step(const ChannelState& state, const ChannelParams& params, const RngStream& slot_rng);

// h = p o a
ComplexVector cir(const ChannelState& state);

// Expected ||h||^2 under the stationary model.
double expected_cir_energy(const ChannelParams& params);

// Expected ||h(t) - h(t-1)||^2 under the stationary model: amplitude drift on
// persistent taps plus full energy on births and deaths.
double expected_differential_energy(const ChannelParams& params);

} // namespace csfb

#endif // CSFB_CHANNEL_HPP
