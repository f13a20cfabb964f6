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

#ifndef CSFB_FEEDBACK_HPP
#define CSFB_FEEDBACK_HPP

#include "csfb/channel.hpp"
#include "csfb/errors.hpp"
#include "csfb/numerics.hpp"
#include "csfb/recovery.hpp"
#include "csfb/sensing.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csfb {

enum class Scheme { direct, differential };

// What the user subtracts in differential slots.
//   true_previous:           h(t) - h(t-1), the true previous CIR
//   reconstruction_tracking: h(t) - h_hat(t-1), the BS reconstruction, which
//                            the user mirrors by replaying the BS decode
enum class ReferenceMode { true_previous, reconstruction_tracking };

class FeedbackError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FeedbackConfig {
    Scheme scheme = Scheme::differential;
    double eta_init = 0.45;
    double eta_diff = 0.15;
    std::size_t period_p = 3;
    double snr_db = kNoiselessSnrDb;
    BudgetRule budget_init{};
    BudgetRule budget_diff{};
    ReferenceMode reference_mode = ReferenceMode::true_previous;
    std::size_t horizon_t = 30;
    RecoveryOptions solver{};

    // P for the differential scheme, 1 for direct.
    std::size_t effective_period() const { return scheme == Scheme::direct ? 1 : period_p; }

    // (eta_init + (P - 1) eta_diff) / P; eta_init for the direct scheme.
    double average_ratio() const;

    void validate() const;
};

// Sensing operators and noise calibration, shared by every lane of one
// sweep point. Matrices are keyed by (master_seed, M), so schemes that use
// the same M see the same operator.
struct FeedbackResources {
    SensingMatrix init_matrix;
    std::optional<SensingMatrix> diff_matrix;
    double init_signal_energy = 1.0; // E||h||^2
    double diff_signal_energy = 1.0; // E||h(t) - h(t-1)||^2

    static FeedbackResources make(const FeedbackConfig& config, const ChannelParams& channel,
                                  std::uint64_t master_seed);

    const SensingMatrix& matrix_for(bool init_slot) const;
};

SensingMatrix sensing_matrix_for(std::size_t m, std::size_t l, std::uint64_t master_seed);

// BS-side memory of one antenna link.
struct SchemeState {
    ComplexVector h_hat_prev;
    std::size_t slot_index = 1; // slot the next measurement belongs to

    static SchemeState fresh(std::size_t taps);
};

// User-side memory of one antenna link.
struct UserState {
    ComplexVector reference;   // what differential slots subtract
    SchemeState mirror;        // replayed BS state (reconstruction tracking)
    std::size_t slot_index = 1;

    static UserState fresh(std::size_t taps);
};

struct EncodedSlot {
    Measurement measurement;
    ComplexVector target; // the vector actually compressed (h or its difference)
    double sigma_n = 0.0;
};

struct DecodedSlot {
    ComplexVector h_hat;
    SchemeState next;
    RecoveryResult recovery;
};

ComplexVector differential(const ComplexVector& h_curr, const ComplexVector& h_prev);

// (slot_index - 1) mod P == 0; slots are 1-based.
bool is_init_slot(std::size_t slot_index, std::size_t period_p);

EncodedSlot user_encode(const ComplexVector& h_curr, const UserState& user, const FeedbackConfig& config,
                        const FeedbackResources& resources, std::size_t antenna_index, RngStream& noise_rng);

// Budget for a slot about to be decoded. `target` feeds oracle mode and may be
// null otherwise. Energy mode profiles a pilot recovery of `measurement` at
// the largest admissible budget; without a measurement it uses fixed_k.
SparsityBudget resolve_budget(const FeedbackConfig& config, const FeedbackResources& resources, bool init_slot,
                              const ComplexVector* target, const ComplexVector* measurement);

DecodedSlot bs_decode(const Measurement& m, const SchemeState& state, const FeedbackConfig& config,
                      const FeedbackResources& resources, SparsityBudget budget);

// Advances the user's reference after slot `h_curr` was fed back.
UserState user_reference_update(const UserState& user, const ComplexVector& h_curr, const Measurement& sent,
                                const FeedbackConfig& config, const FeedbackResources& resources,
                                SparsityBudget budget);

struct SlotOutcome {
    ComplexVector h_hat;
    bool init_slot = true;
    std::size_t measurements = 0;
    std::size_t budget_k = 0;
    std::size_t iterations = 0;
};

// One antenna link driven slot by slot: user encode, BS decode, reference
// update.
class FeedbackLink {
public:
    FeedbackLink(const FeedbackConfig& config, const FeedbackResources& resources, std::size_t antenna_index,
                 std::size_t taps);

    SlotOutcome process(const ComplexVector& h_curr, RngStream noise_rng);

    const SchemeState& bs_state() const { return bs_; }
    const UserState& user_state() const { return user_; }

private:
    const FeedbackConfig* config_;
    const FeedbackResources* resources_;
    std::size_t antenna_;
    SchemeState bs_;
    UserState user_;
};

std::string to_string(Scheme s);
std::string to_string(ReferenceMode m);
Scheme scheme_from_string(const std::string& s);
ReferenceMode reference_mode_from_string(const std::string& s);

} // namespace csfb

#endif // CSFB_FEEDBACK_HPP
