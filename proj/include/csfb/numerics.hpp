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

#ifndef CSFB_NUMERICS_HPP
#define CSFB_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace csfb {

using cdouble = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

// Thrown by least_squares when the system matrix has numerically dependent
// columns. rank() is the rank detected by the pivoted QR.
class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(std::size_t rank, std::size_t cols);
    std::size_t rank() const noexcept { return rank_; }
    std::size_t cols() const noexcept { return cols_; }

private:
    std::size_t rank_;
    std::size_t cols_;
};

// Counter-based random stream. The n-th output is a pure function of
// (seed, stream_id, n), so any (trial, antenna, slot) lane can be
// regenerated without replaying the lanes before it.
//
// Satisfies UniformRandomBitGenerator; copying a stream copies its position.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    // Child stream identified by `tag`, starting at counter zero. The parent's
    // position does not matter.
    RngStream substream(std::uint64_t tag) const noexcept;

    result_type operator()() noexcept;

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return counter_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer. Exposed for deriving stream ids from structured keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Folds a sequence of tags into one stream id.
std::uint64_t combine_tags(std::initializer_list<std::uint64_t> tags) noexcept;

// Zeroth-order Bessel function of the first kind.
// Power series for |x| <= 12, Miller backward recurrence for 12 < |x| <= 25,
// Hankel asymptotic expansion beyond. Absolute error below 1e-12 on |x| <= 20.
double bessel_j0(double x);

// n i.i.d. CN(0, variance) draws; real and imaginary parts each carry variance/2.
ComplexVector sample_complex_gaussian(RngStream& rng, std::size_t n, double variance);

// Minimizer of ||A x - b||_2 via column-pivoted Householder QR.
// Throws RankDeficientError when a pivot falls below 1e-10 of the largest.
ComplexVector least_squares(const ComplexMatrix& a, const ComplexVector& b);

bool all_finite(const ComplexVector& v) noexcept;
bool all_finite(const ComplexMatrix& m) noexcept;

} // namespace csfb

#endif // CSFB_NUMERICS_HPP
