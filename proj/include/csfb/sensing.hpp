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

#ifndef CSFB_SENSING_HPP
#define CSFB_SENSING_HPP

#include "csfb/errors.hpp"
#include "csfb/numerics.hpp"

#include <limits>

namespace csfb {

// M x L complex Gaussian measurement operator with i.i.d. CN(0, 1/M) entries.
// `seed` is the stream descriptor it was drawn from; generate_matrix(m, l, seed)
// reproduces the matrix bit-exactly.
struct SensingMatrix {
    ComplexMatrix matrix;
    std::size_t m = 0;
    std::size_t l = 0;
    RngStream seed{0, 0};
};

struct Measurement {
    ComplexVector y;
    std::size_t slot_index = 1;
    std::size_t antenna_index = 0;
    bool is_init_slot = true;
};

struct NoisyMeasurement {
    ComplexVector y;
    double sigma_n = 0.0;
};

inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

SensingMatrix generate_matrix(std::size_t m, std::size_t l, RngStream rng);

// M = round(eta * L), at least 1.
std::size_t measurements_for_ratio(double eta, std::size_t l);

ComplexVector compress(const SensingMatrix& phi, const ComplexVector& x);

// Adds CN(0, sigma_n^2) noise with sigma_n^2 = signal_power / 10^(snr_db/10).
// snr_db = +inf is the noiseless sentinel and returns y unchanged.
NoisyMeasurement add_noise(const ComplexVector& y, double snr_db, double signal_power, RngStream& rng);

// Per-entry measurement power E|<row, x>|^2 for a signal of expected energy
// `signal_energy` under the CN(0, 1/M) ensemble.
double measurement_power(double signal_energy, std::size_t m);

} // namespace csfb

#endif // CSFB_SENSING_HPP
