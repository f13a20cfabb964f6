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

#include "csfb/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace csfb {

SensingMatrix generate_matrix(std::size_t m, std::size_t l, RngStream rng) {
    if (m < 1 || m >= l)
        throw DimensionError("generate_matrix: need 1 <= m < l, got m=" + std::to_string(m) +
                             " l=" + std::to_string(l));
    SensingMatrix phi;
    phi.m = m;
    phi.l = l;
    phi.seed = rng;
    RngStream draw = rng;
    // column by column, matching Eigen's storage order
    const ComplexVector entries = sample_complex_gaussian(draw, m * l, 1.0 / static_cast<double>(m));
    phi.matrix = Eigen::Map<const ComplexMatrix>(entries.data(), static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(l));
    return phi;
}

std::size_t measurements_for_ratio(double eta, std::size_t l) {
    if (!(eta > 0.0 && eta < 1.0))
        throw DimensionError("measurements_for_ratio: eta must lie in (0, 1)");
    const auto m = static_cast<std::size_t>(std::llround(eta * static_cast<double>(l)));
    return std::max<std::size_t>(m, 1);
}

ComplexVector compress(const SensingMatrix& phi, const ComplexVector& x) {
    if (static_cast<std::size_t>(x.size()) != phi.l)
        throw DimensionError("compress: signal length " + std::to_string(x.size()) + " does not match L=" +
                             std::to_string(phi.l));
    return phi.matrix * x;
}

NoisyMeasurement add_noise(const ComplexVector& y, double snr_db, double signal_power, RngStream& rng) {
    if (!(signal_power > 0.0) || !std::isfinite(signal_power))
        throw std::invalid_argument("add_noise: signal_power must be positive");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("add_noise: snr_db must be a number or +inf");
    if (snr_db == kNoiselessSnrDb)
        return {y, 0.0};
    const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
    NoisyMeasurement out;
    out.y = y + sample_complex_gaussian(rng, static_cast<std::size_t>(y.size()), noise_var);
    out.sigma_n = std::sqrt(noise_var);
    return out;
}

double measurement_power(double signal_energy, std::size_t m) {
    return signal_energy / static_cast<double>(m);
}

} // namespace csfb
