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

#include "csfb/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace csfb {

namespace {
constexpr std::uint64_t kSupportTag = 0x5u;
constexpr std::uint64_t kAmplitudeTag = 0xAu;
} // namespace

double derive_p10(double mu, double p01) {
    if (!(mu > 0.0 && mu < 1.0))
        throw ParameterError("derive_p10: mu must lie in (0, 1), got " + std::to_string(mu));
    if (!(p01 >= 0.0 && p01 <= 1.0))
        throw ParameterError("derive_p10: p01 must lie in [0, 1], got " + std::to_string(p01));
    const double p10 = mu * p01 / (1.0 - mu);
    if (p10 > 1.0)
        throw ParameterError("derive_p10: mu*p01/(1-mu) = " + std::to_string(p10) + " exceeds 1");
    return p10;
}

ChannelParams ChannelParams::make(std::size_t taps, double mu, double p01, double doppler_hz, double slot_s,
                                  double sigma_w) {
    ChannelParams p;
    p.taps = taps;
    p.mu = mu;
    p.p01 = p01;
    p.doppler_hz = doppler_hz;
    p.slot_s = slot_s;
    p.sigma_w = sigma_w;
    if (!std::isfinite(doppler_hz) || doppler_hz < 0.0 || !std::isfinite(slot_s) || slot_s < 0.0)
        throw ParameterError("ChannelParams: doppler and slot duration must be finite and non-negative");
    p.rho = bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_s);
    p.validate();
    return p;
}

void ChannelParams::validate() const {
    if (taps < 1)
        throw ParameterError("ChannelParams: taps must be at least 1");
    derive_p10(mu, p01);
    if (!(sigma_w > 0.0) || !std::isfinite(sigma_w))
        throw ParameterError("ChannelParams: sigma_w must be positive");
    const double expected = bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_s);
    if (!(std::abs(expected - rho) <= 1e-12))
        throw ParameterError("ChannelParams: cached rho does not match J0(2 pi f_d tau)");
    if (std::abs(rho) > 1.0)
        throw ParameterError("ChannelParams: |rho| exceeds 1");
}

ChannelState init_state(const ChannelParams& params, RngStream& rng) {
    params.validate();
    ChannelState s;
    s.support.resize(params.taps);
    for (auto& bit : s.support)
        bit = rng.uniform() < params.mu ? 1 : 0;
    s.amplitude = sample_complex_gaussian(rng, params.taps, 1.0);
    return s;
}

SupportVector evolve_support(std::span<const std::uint8_t> support, const ChannelParams& params, RngStream& rng) {
    if (support.size() != params.taps)
        throw ParameterError("evolve_support: support length does not match taps");
    const double p10 = params.p10();
    SupportVector next(support.size());
    for (std::size_t l = 0; l < support.size(); ++l) {
        // one draw per tap regardless of state keeps streams aligned across taps
        const double u = rng.uniform();
        if (support[l])
            next[l] = u < params.p01 ? 0 : 1;
        else
            next[l] = u < p10 ? 1 : 0;
    }
    return next;
}

ComplexVector evolve_amplitude(const ComplexVector& amplitude, const ChannelParams& params, RngStream& rng) {
    if (static_cast<std::size_t>(amplitude.size()) != params.taps)
        throw ParameterError("evolve_amplitude: amplitude length does not match taps");
    const double rho = params.rho;
    const double gain = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    if (gain == 0.0)
        return amplitude;
    ComplexVector w = sample_complex_gaussian(rng, params.taps, params.sigma_w * params.sigma_w);
    return rho * amplitude + gain * w;
}

ChannelState step(const ChannelState& state, const ChannelParams& params, const RngStream& slot_rng) {
    RngStream support_rng = slot_rng.substream(kSupportTag);
    RngStream amplitude_rng = slot_rng.substream(kAmplitudeTag);
    ChannelState next;
    next.support = evolve_support(state.support, params, support_rng);
    next.amplitude = evolve_amplitude(state.amplitude, params, amplitude_rng);
    return next;
}

ComplexVector cir(const ChannelState& state) {
    if (state.support.size() != static_cast<std::size_t>(state.amplitude.size()))
        throw ParameterError("cir: support and amplitude lengths differ");
    ComplexVector h(state.amplitude.size());
    for (Eigen::Index l = 0; l < h.size(); ++l)
        h[l] = state.support[static_cast<std::size_t>(l)] ? state.amplitude[l] : cdouble(0.0, 0.0);
    return h;
}

double expected_cir_energy(const ChannelParams& params) {
    return static_cast<double>(params.taps) * params.mu * params.sigma_w * params.sigma_w;
}

double expected_differential_energy(const ChannelParams& params) {
    const double var = params.sigma_w * params.sigma_w;
    const double persist = params.mu * (1.0 - params.p01) * 2.0 * (1.0 - params.rho) * var;
    // deaths (mu p01) and births ((1-mu) p10 = mu p01) each carry a full tap
    const double turnover = 2.0 * params.mu * params.p01 * var;
    return static_cast<double>(params.taps) * (persist + turnover);
}

} // namespace csfb
