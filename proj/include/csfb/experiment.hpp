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

#ifndef CSFB_EXPERIMENT_HPP
#define CSFB_EXPERIMENT_HPP

#include "csfb/channel.hpp"
#include "csfb/errors.hpp"
#include "csfb/feedback.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csfb {

enum class NmseMode { per_slot_mean, block };

struct ExperimentConfig {
    ChannelParams channel = ChannelParams::make(200, 0.1, 0.05, 10.0, 1e-3, 1.0);
    std::vector<FeedbackConfig> points; // snr_db of each point is replaced by the grid
    std::size_t antennas = 8;
    std::size_t trials = 200;
    std::size_t trial_offset = 0; // first global trial index
    std::size_t horizon_t = 30;
    std::vector<double> snr_grid = {0, 5, 10, 15, 20, 25, 30};
    std::uint64_t master_seed = 20150101;
    NmseMode nmse_mode = NmseMode::per_slot_mean;
    std::size_t threads = 0; // 0: hardware concurrency, capped by CSFB_THREADS

    void validate() const;
};

// The pinned desk-scale configuration run by `csfb demo`.
ExperimentConfig default_experiment();

// Sweep points of the pinned configuration: direct at 45% and 25%, the
// differential scheme at 45/15/15 and 65/35/35 (P = 3), all with oracle
// budgets, plus fixed-budget variants of the 45% direct and 25% differential.
std::vector<FeedbackConfig> default_points(const ChannelParams& channel);

// Error-energy bookkeeping of one trial at one (point, SNR).
struct TrialStats {
    double nmse_sum = 0.0;     // sum of per-slot, per-antenna NMSE
    std::size_t samples = 0;   // slots contributing to nmse_sum
    std::size_t excluded = 0;  // slots with an all-zero true CIR
    double error_energy = 0.0; // sum ||h_hat - h||^2
    double signal_energy = 0.0;
    std::size_t fed_back_scalars = 0;

    friend bool operator==(const TrialStats&, const TrialStats&) = default;
};

struct ResultRow {
    std::string scheme;
    double eta_avg = 0.0;
    double eta_init = 0.0;
    double eta_diff = 0.0;
    std::size_t period_p = 1;
    std::string budget_mode;
    std::string reference_mode;
    double snr_db = 0.0;
    double nmse_db = 0.0;
    double nmse_ci_db = 0.0;
    std::size_t trials = 0;
    std::size_t excluded_samples = 0;
    std::uint64_t master_seed = 0;

    std::size_t point_index = 0;
    double nmse_linear = 0.0;
    std::vector<TrialStats> trial_stats; // in trial-index order
};

struct SweepFailure {
    std::size_t point_index = 0;
    std::string message;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<SweepFailure> failures;
};

// ||h_hat - h||^2 / ||h||^2; std::nullopt when ||h|| = 0.
std::optional<double> nmse(const ComplexVector& h_true, const ComplexVector& h_hat);

// Linear-domain estimate and 95% normal-approximation half-width (dB) over
// per-trial values. Trials are folded in the order given.
struct Aggregate {
    double nmse_linear = 0.0;
    double nmse_db = 0.0;
    double ci_db = 0.0;
    std::size_t excluded = 0;
};
Aggregate aggregate(std::span<const TrialStats> trials, NmseMode mode);

// True CIR sequence of one (trial, antenna) lane: horizon_t vectors.
std::vector<ComplexVector> channel_sequence(const ChannelParams& params, std::uint64_t master_seed,
                                            std::size_t trial, std::size_t antenna, std::size_t horizon_t);

// Feedback-noise stream of one (trial, antenna, slot).
RngStream noise_stream(std::uint64_t master_seed, std::size_t trial, std::size_t antenna, std::size_t slot);

SweepResult run_sweep(const ExperimentConfig& config);

std::size_t resolve_thread_count(std::size_t requested);

// Table columns, in order.
inline constexpr const char* kResultColumns =
    "scheme,eta_avg,eta_init,eta_diff,period_p,budget_mode,reference_mode,snr_db,nmse_db,nmse_ci_db,trials,"
    "excluded_samples,master_seed";

std::string format_table(std::span<const ResultRow> rows);

// Writes the table to `path` and a metadata record to `path` + ".meta.json".
void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path,
                  const ExperimentConfig& config);

// Configuration files are JSON objects with flat keys named after the
// ExperimentConfig fields; see README.md for the schema.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);

std::string to_string(NmseMode mode);
NmseMode nmse_mode_from_string(const std::string& s);

// Parses "inf", "+inf" or a decimal number.
double parse_snr(const std::string& s);

std::string code_version();

} // namespace csfb

#endif // CSFB_EXPERIMENT_HPP
