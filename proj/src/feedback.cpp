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

#include "csfb/feedback.hpp"

#include <cmath>

namespace csfb {

namespace {

constexpr std::uint64_t kPhiTag = 0x50484921ULL;

std::vector<double> energies(const ComplexVector& x) {
    std::vector<double> e(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        e[static_cast<std::size_t>(i)] = std::norm(x[i]);
    return e;
}

bool slot_is_init(const FeedbackConfig& config, std::size_t slot_index) {
    return is_init_slot(slot_index, config.effective_period());
}

} // namespace

double FeedbackConfig::average_ratio() const {
    const std::size_t p = effective_period();
    if (p == 1)
        return eta_init;
    return (eta_init + static_cast<double>(p - 1) * eta_diff) / static_cast<double>(p);
}

void FeedbackConfig::validate() const {
    if (!(eta_init > 0.0 && eta_init < 1.0))
        throw ConfigError("feedback: eta_init must lie in (0, 1)");
    if (scheme == Scheme::differential) {
        if (period_p < 1)
            throw ConfigError("feedback: period_p must be at least 1");
        if (period_p > 1 && !(eta_diff > 0.0 && eta_diff < 1.0))
            throw ConfigError("feedback: eta_diff must lie in (0, 1)");
    }
    if (horizon_t < 1)
        throw ConfigError("feedback: horizon_t must be at least 1");
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("feedback: snr_db must be a number or +inf");
    if (!(solver.tol >= 0.0))
        throw ConfigError("feedback: solver tolerance must be non-negative");
}

SensingMatrix sensing_matrix_for(std::size_t m, std::size_t l, std::uint64_t master_seed) {
    return generate_matrix(m, l, RngStream(master_seed, combine_tags({kPhiTag, m, l})));
}

FeedbackResources FeedbackResources::make(const FeedbackConfig& config, const ChannelParams& channel,
                                          std::uint64_t master_seed) {
    config.validate();
    FeedbackResources r;
    const std::size_t l = channel.taps;
    r.init_matrix = sensing_matrix_for(measurements_for_ratio(config.eta_init, l), l, master_seed);
    if (config.effective_period() > 1)
        r.diff_matrix = sensing_matrix_for(measurements_for_ratio(config.eta_diff, l), l, master_seed);
    r.init_signal_energy = expected_cir_energy(channel);
    r.diff_signal_energy = expected_differential_energy(channel);
    if (r.diff_matrix && !(r.diff_signal_energy > 0.0) && std::isfinite(config.snr_db))
        throw ConfigError("feedback: the channel has no expected differential energy, so the SNR of "
                          "differential slots is undefined");
    return r;
}

const SensingMatrix& FeedbackResources::matrix_for(bool init_slot) const {
    if (init_slot || !diff_matrix)
        return init_matrix;
    return *diff_matrix;
}

SchemeState SchemeState::fresh(std::size_t taps) {
    SchemeState s;
    s.h_hat_prev = ComplexVector::Zero(static_cast<Eigen::Index>(taps));
    return s;
}

UserState UserState::fresh(std::size_t taps) {
    UserState u;
    u.reference = ComplexVector::Zero(static_cast<Eigen::Index>(taps));
    u.mirror = SchemeState::fresh(taps);
    return u;
}

ComplexVector differential(const ComplexVector& h_curr, const ComplexVector& h_prev) {
    if (h_curr.size() != h_prev.size())
        throw DimensionError("differential: CIR lengths differ");
    return h_curr - h_prev;
}

bool is_init_slot(std::size_t slot_index, std::size_t period_p) {
    if (slot_index < 1)
        throw std::invalid_argument("is_init_slot: slots are numbered from 1");
    if (period_p < 1)
        throw std::invalid_argument("is_init_slot: period must be at least 1");
    return (slot_index - 1) % period_p == 0;
}

EncodedSlot user_encode(const ComplexVector& h_curr, const UserState& user, const FeedbackConfig& config,
                        const FeedbackResources& resources, std::size_t antenna_index, RngStream& noise_rng) {
    const bool init = slot_is_init(config, user.slot_index);
    EncodedSlot out;
    out.target = init ? h_curr : differential(h_curr, user.reference);
    const SensingMatrix& phi = resources.matrix_for(init);
    ComplexVector clean = compress(phi, out.target);
    if (std::isfinite(config.snr_db)) {
        const double energy = init ? resources.init_signal_energy : resources.diff_signal_energy;
        NoisyMeasurement noisy = add_noise(clean, config.snr_db, measurement_power(energy, phi.m), noise_rng);
        out.measurement.y = std::move(noisy.y);
        out.sigma_n = noisy.sigma_n;
    } else {
        out.measurement.y = std::move(clean);
    }
    out.measurement.slot_index = user.slot_index;
    out.measurement.antenna_index = antenna_index;
    out.measurement.is_init_slot = init;
    return out;
}

SparsityBudget resolve_budget(const FeedbackConfig& config, const FeedbackResources& resources, bool init_slot,
                              const ComplexVector* target, const ComplexVector* measurement) {
    const BudgetRule& rule = init_slot ? config.budget_init : config.budget_diff;
    const SensingMatrix& phi = resources.matrix_for(init_slot);
    BudgetContext ctx;
    ctx.truth = target;
    ctx.max_k = phi.m / 2;
    std::vector<double> profile;
    if (rule.mode == BudgetMode::energy && measurement != nullptr && ctx.max_k >= 1) {
        profile = energies(subspace_pursuit(phi, *measurement, SparsityBudget{ctx.max_k}, config.solver).x_hat);
        ctx.reference_energy = profile;
    }
    return estimate_budget(rule, ctx);
}

DecodedSlot bs_decode(const Measurement& m, const SchemeState& state, const FeedbackConfig& config,
                      const FeedbackResources& resources, SparsityBudget budget) {
    const bool init = slot_is_init(config, state.slot_index);
    const std::string where =
        " (slot " + std::to_string(m.slot_index) + ", antenna " + std::to_string(m.antenna_index) + ")";
    if (m.slot_index != state.slot_index || m.is_init_slot != init)
        throw FeedbackError("bs_decode: measurement does not match the BS slot schedule" + where);
    const SensingMatrix& phi = resources.matrix_for(init);
    DecodedSlot out;
    try {
        out.recovery = subspace_pursuit(phi, m.y, budget, config.solver);
    } catch (const std::exception& e) {
        throw FeedbackError(std::string(e.what()) + where);
    }
    out.h_hat = init ? out.recovery.x_hat : ComplexVector(state.h_hat_prev + out.recovery.x_hat);
    out.next = state;
    out.next.h_hat_prev = out.h_hat;
    out.next.slot_index = state.slot_index + 1;
    return out;
}

UserState user_reference_update(const UserState& user, const ComplexVector& h_curr, const Measurement& sent,
                                const FeedbackConfig& config, const FeedbackResources& resources,
                                SparsityBudget budget) {
    UserState next = user;
    next.slot_index = user.slot_index + 1;
    if (config.reference_mode == ReferenceMode::true_previous) {
        next.reference = h_curr;
        return next;
    }
    DecodedSlot replay = bs_decode(sent, user.mirror, config, resources, budget);
    next.reference = replay.h_hat;
    next.mirror = std::move(replay.next);
    return next;
}

FeedbackLink::FeedbackLink(const FeedbackConfig& config, const FeedbackResources& resources,
                           std::size_t antenna_index, std::size_t taps)
    : config_(&config), resources_(&resources), antenna_(antenna_index), bs_(SchemeState::fresh(taps)),
      user_(UserState::fresh(taps)) {}

SlotOutcome FeedbackLink::process(const ComplexVector& h_curr, RngStream noise_rng) {
    EncodedSlot enc = user_encode(h_curr, user_, *config_, *resources_, antenna_, noise_rng);
    const bool init = enc.measurement.is_init_slot;
    const SparsityBudget budget = resolve_budget(*config_, *resources_, init, &enc.target, &enc.measurement.y);
    DecodedSlot dec = bs_decode(enc.measurement, bs_, *config_, *resources_, budget);
    user_ = user_reference_update(user_, h_curr, enc.measurement, *config_, *resources_, budget);

    SlotOutcome out;
    out.init_slot = init;
    out.measurements = static_cast<std::size_t>(enc.measurement.y.size());
    out.budget_k = budget.k;
    out.iterations = dec.recovery.iterations;
    out.h_hat = dec.h_hat;
    bs_ = std::move(dec.next);
    return out;
}

std::string to_string(Scheme s) {
    return s == Scheme::direct ? "direct" : "differential";
}

std::string to_string(ReferenceMode m) {
    return m == ReferenceMode::true_previous ? "true-previous" : "reconstruction-tracking";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "direct")
        return Scheme::direct;
    if (s == "differential")
        return Scheme::differential;
    throw ConfigError("unknown scheme '" + s + "' (expected direct|differential)");
}

ReferenceMode reference_mode_from_string(const std::string& s) {
    if (s == "true-previous")
        return ReferenceMode::true_previous;
    if (s == "reconstruction-tracking")
        return ReferenceMode::reconstruction_tracking;
    throw ConfigError("unknown reference mode '" + s + "' (expected true-previous|reconstruction-tracking)");
}

} // namespace csfb
