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

#include "csfb/numerics.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace csfb {

RankDeficientError::RankDeficientError(std::size_t rank, std::size_t cols)
    : std::runtime_error("least_squares: rank-deficient system (rank " + std::to_string(rank) + " of " +
                         std::to_string(cols) + " columns)"),
      rank_(rank), cols_(cols) {}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t combine_tags(std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (auto t : tags)
        h = mix64(h ^ mix64(t));
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id), key_(mix64(mix64(seed) ^ mix64(stream_id ^ 0xD1B54A32D192ED03ULL))) {}

RngStream RngStream::substream(std::uint64_t tag) const noexcept {
    return RngStream(seed_, combine_tags({stream_id_, tag}));
}

RngStream::result_type RngStream::operator()() noexcept {
    // SplitMix64 evaluated at an explicit counter.
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double RngStream::uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

namespace {

double j0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum)))
            break;
    }
    return sum;
}

// Miller's algorithm, normalized by J0 + 2 * sum J_2k = 1.
double j0_miller(double x) {
    const int start = 2 * (static_cast<int>(x / 2.0) + 24);
    double j_next = 0.0;
    double j_curr = 1e-300;
    double norm = 0.0;
    for (int n = start; n > 0; --n) {
        const double j_prev = (2.0 * n / x) * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        // j_curr now holds order n-1
        if ((n - 1) % 2 == 0 && n - 1 > 0)
            norm += 2.0 * j_curr;
        if (std::abs(j_curr) > 1e250) {
            j_curr *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j_curr;
    return j_curr / norm;
}

// Hankel expansion: J0(x) = sqrt(2/(pi x)) (P cos(chi) + Q sin(chi)), chi = x - pi/4,
// with Q = 1/(8x) - ... collecting the odd-order terms.
double j0_asymptotic(double x) {
    const double inv8x = 1.0 / (8.0 * x);
    double p = 1.0;
    double q = 0.0;
    double term = 1.0; // a_k / (8x)^k with a_k = prod (2j-1)^2 / k!
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd * inv8x / k;
        if (std::abs(term) >= last || std::abs(term) < 1e-18)
            break;
        last = std::abs(term);
        switch (k % 4) {
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        default: p += term; break;
        }
    }
    // cos(x - pi/4) and sin(x - pi/4) without subtracting from a large argument
    const double c = std::cos(x);
    const double s = std::sin(x);
    const double cos_chi = (c + s) * std::numbers::sqrt2 * 0.5;
    const double sin_chi = (s - c) * std::numbers::sqrt2 * 0.5;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cos_chi + q * sin_chi);
}

} // namespace

double bessel_j0(double x) {
    if (!std::isfinite(x))
        throw std::invalid_argument("bessel_j0: argument must be finite");
    const double ax = std::abs(x);
    if (ax <= 12.0)
        return j0_series(ax);
    if (ax <= 25.0)
        return j0_miller(ax);
    return j0_asymptotic(ax);
}

ComplexVector sample_complex_gaussian(RngStream& rng, std::size_t n, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("sample_complex_gaussian: variance must be positive and finite");
    if (n == 0)
        throw std::invalid_argument("sample_complex_gaussian: n must be at least 1");
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
    ComplexVector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out[i] = cdouble(re, im);
    }
    return out;
}

ComplexVector least_squares(const ComplexMatrix& a, const ComplexVector& b) {
    if (a.cols() < 1 || a.rows() < a.cols())
        throw std::invalid_argument("least_squares: need rows >= cols >= 1");
    if (b.size() != a.rows())
        throw std::invalid_argument("least_squares: right-hand side length mismatch");
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(a);
    qr.setThreshold(1e-10);
    const auto rank = static_cast<std::size_t>(qr.rank());
    if (rank < static_cast<std::size_t>(a.cols()))
        throw RankDeficientError(rank, static_cast<std::size_t>(a.cols()));
    return qr.solve(b);
}

bool all_finite(const ComplexVector& v) noexcept {
    return v.allFinite();
}

bool all_finite(const ComplexMatrix& m) noexcept {
    return m.allFinite();
}

} // namespace csfb
