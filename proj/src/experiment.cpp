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

#include "csfb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace csfb {

namespace {

constexpr std::uint64_t kChannelTag = 0xC4A77E1ULL;
constexpr std::uint64_t kNoiseTag = 0x7015EULL;

// per-trial dB values are floored so a numerically exact trial stays finite
constexpr double kFloorLinear = 1e-30;

double to_db(double linear) {
    return 10.0 * std::log10(std::max(linear, kFloorLinear));
}

double trial_value(const TrialStats& t, NmseMode mode) {
    if (mode == NmseMode::block)
        return t.signal_energy > 0.0 ? t.error_energy / t.signal_energy : 0.0;
    return t.samples > 0 ? t.nmse_sum / static_cast<double>(t.samples) : 0.0;
}

std::string budget_label(const FeedbackConfig& f) {
    if (f.effective_period() == 1)
        return describe(f.budget_init);
    return describe(f.budget_init) + "/" + describe(f.budget_diff);
}

} // namespace

void ExperimentConfig::validate() const {
    channel.validate();
    if (points.empty())
        throw ConfigError("experiment: at least one sweep point is required");
    if (antennas < 1)
        throw ConfigError("experiment: antennas must be at least 1");
    if (trials < 1)
        throw ConfigError("experiment: trials must be at least 1");
    if (horizon_t < 1)
        throw ConfigError("experiment: horizon_t must be at least 1");
    if (snr_grid.empty())
        throw ConfigError("experiment: snr_grid must not be empty");
    for (double s : snr_grid)
        if (std::isnan(s) || s == -std::numeric_limits<double>::infinity())
            throw ConfigError("experiment: snr_grid entries must be numbers or +inf");
    for (std::size_t i = 0; i < points.size(); ++i) {
        try {
            FeedbackConfig f = points[i];
            f.horizon_t = horizon_t;
            f.validate();
            const std::size_t m_init = measurements_for_ratio(f.eta_init, channel.taps);
            if (m_init >= channel.taps)
                throw ConfigError("eta_init leaves no compression at L=" + std::to_string(channel.taps));
            if (f.effective_period() > 1 && measurements_for_ratio(f.eta_diff, channel.taps) < 2)
                throw ConfigError("eta_diff yields fewer than 2 measurements");
            if (m_init < 2)
                throw ConfigError("eta_init yields fewer than 2 measurements");
        } catch (const std::exception& e) {
            throw ConfigError("experiment: point " + std::to_string(i) + ": " + e.what());
        }
    }
}

std::vector<FeedbackConfig> default_points(const ChannelParams& channel) {
    auto point = [](Scheme scheme, double eta_init, double eta_diff, std::size_t p) {
        FeedbackConfig f;
        f.scheme = scheme;
        f.eta_init = eta_init;
        f.eta_diff = eta_diff;
        f.period_p = p;
        f.budget_init = BudgetRule{BudgetMode::oracle, 1, 0.99};
        f.budget_diff = BudgetRule{BudgetMode::oracle, 1, 0.99};
        return f;
    };
    std::vector<FeedbackConfig> pts;
    pts.push_back(point(Scheme::direct, 0.45, 0.0, 1));
    pts.push_back(point(Scheme::direct, 0.25, 0.0, 1));
    pts.push_back(point(Scheme::differential, 0.45, 0.15, 3));
    pts.push_back(point(Scheme::differential, 0.65, 0.35, 3));
    // budget-agnostic counterparts: fixed K at the expected CIR sparsity and
    // the default differential budget
    const auto mean_k = static_cast<std::size_t>(
        std::max(1LL, std::llround(channel.mu * static_cast<double>(channel.taps))));
    const std::size_t diff_k = default_differential_budget(channel.mu, channel.taps, channel.p01);
    FeedbackConfig fixed_direct = point(Scheme::direct, 0.45, 0.0, 1);
    fixed_direct.budget_init = BudgetRule{BudgetMode::fixed, mean_k, 0.99};
    pts.push_back(fixed_direct);
    FeedbackConfig fixed_diff = point(Scheme::differential, 0.45, 0.15, 3);
    fixed_diff.budget_init = BudgetRule{BudgetMode::fixed, mean_k, 0.99};
    fixed_diff.budget_diff = BudgetRule{BudgetMode::fixed, diff_k, 0.99};
    pts.push_back(fixed_diff);
    return pts;
}

ExperimentConfig default_experiment() {
    ExperimentConfig c;
    c.points = default_points(c.channel);
    return c;
}

std::optional<double> nmse(const ComplexVector& h_true, const ComplexVector& h_hat) {
    if (h_true.size() != h_hat.size())
        throw DimensionError("nmse: vector lengths differ");
    const double energy = h_true.squaredNorm();
    if (energy == 0.0)
        return std::nullopt;
    return (h_hat - h_true).squaredNorm() / energy;
}

Aggregate aggregate(std::span<const TrialStats> trials, NmseMode mode) {
    Aggregate a;
    double nmse_sum = 0.0;
    std::size_t samples = 0;
    double err = 0.0;
    double sig = 0.0;
    for (const auto& t : trials) {
        nmse_sum += t.nmse_sum;
        samples += t.samples;
        err += t.error_energy;
        sig += t.signal_energy;
        a.excluded += t.excluded;
    }
    if (mode == NmseMode::block)
        a.nmse_linear = sig > 0.0 ? err / sig : 0.0;
    else
        a.nmse_linear = samples > 0 ? nmse_sum / static_cast<double>(samples) : 0.0;
    a.nmse_db = to_db(a.nmse_linear);

    const std::size_t n = trials.size();
    if (n >= 2) {
        double mean = 0.0;
        for (const auto& t : trials)
            mean += to_db(trial_value(t, mode));
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& t : trials) {
            const double d = to_db(trial_value(t, mode)) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        a.ci_db = 1.96 * sd / std::sqrt(static_cast<double>(n));
    }
    return a;
}

std::vector<ComplexVector> channel_sequence(const ChannelParams& params, std::uint64_t master_seed,
                                            std::size_t trial, std::size_t antenna, std::size_t horizon_t) {
    const RngStream lane(master_seed, combine_tags({kChannelTag, trial, antenna}));
    std::vector<ComplexVector> out;
    out.reserve(horizon_t);
    RngStream first = lane.substream(1);
    ChannelState state = init_state(params, first);
    out.push_back(cir(state));
    for (std::size_t t = 2; t <= horizon_t; ++t) {
        state = step(state, params, lane.substream(t));
        out.push_back(cir(state));
    }
    return out;
}

RngStream noise_stream(std::uint64_t master_seed, std::size_t trial, std::size_t antenna, std::size_t slot) {
    return RngStream(master_seed, combine_tags({kNoiseTag, trial, antenna, slot}));
}

std::size_t resolve_thread_count(std::size_t requested) {
    std::size_t n = requested;
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("CSFB_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(cap, &end, 10);
        if (end != cap && v > 0)
            n = std::min<std::size_t>(n, v);
    }
    return std::max<std::size_t>(n, 1);
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    const std::size_t n_points = config.points.size();
    const std::size_t n_snr = config.snr_grid.size();
    const std::size_t n_trials = config.trials;
    const std::size_t taps = config.channel.taps;

    // one configuration and resource set per (point, snr)
    std::vector<FeedbackConfig> cells;
    std::vector<std::optional<FeedbackResources>> resources;
    std::vector<std::string> point_error(n_points);
    cells.reserve(n_points * n_snr);
    for (std::size_t p = 0; p < n_points; ++p) {
        for (std::size_t s = 0; s < n_snr; ++s) {
            FeedbackConfig f = config.points[p];
            f.snr_db = config.snr_grid[s];
            f.horizon_t = config.horizon_t;
            cells.push_back(f);
            try {
                resources.emplace_back(FeedbackResources::make(f, config.channel, config.master_seed));
            } catch (const std::exception& e) {
                resources.emplace_back(std::nullopt);
                if (point_error[p].empty())
                    point_error[p] = e.what();
            }
        }
    }

    std::vector<TrialStats> stats(n_points * n_snr * n_trials);
    std::vector<std::string> cell_error(n_points * n_snr);
    std::mutex error_mutex;
    std::atomic<std::size_t> next_trial{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next_trial.fetch_add(1);
            if (i >= n_trials)
                return;
            const std::size_t trial = config.trial_offset + i;
            std::vector<std::vector<ComplexVector>> truth(config.antennas);
            for (std::size_t n = 0; n < config.antennas; ++n)
                truth[n] = channel_sequence(config.channel, config.master_seed, trial, n, config.horizon_t);

            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (!resources[c])
                    continue;
                TrialStats& ts = stats[c * n_trials + i];
                try {
                    for (std::size_t n = 0; n < config.antennas; ++n) {
                        FeedbackLink link(cells[c], *resources[c], n, taps);
                        for (std::size_t t = 1; t <= config.horizon_t; ++t) {
                            const ComplexVector& h = truth[n][t - 1];
                            SlotOutcome out = link.process(h, noise_stream(config.master_seed, trial, n, t));
                            ts.fed_back_scalars += out.measurements;
                            if (auto v = nmse(h, out.h_hat)) {
                                ts.nmse_sum += *v;
                                ++ts.samples;
                            } else {
                                ++ts.excluded;
                            }
                            ts.error_energy += (out.h_hat - h).squaredNorm();
                            ts.signal_energy += h.squaredNorm();
                        }
                    }
                } catch (const std::exception& e) {
                    std::lock_guard lock(error_mutex);
                    if (cell_error[c].empty())
                        cell_error[c] = "trial " + std::to_string(trial) + ": " + e.what();
                }
            }
        }
    };

    const std::size_t n_threads = std::min(resolve_thread_count(config.threads), n_trials);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t k = 0; k < n_threads; ++k)
            pool.emplace_back(worker);
    }

    SweepResult result;
    for (std::size_t p = 0; p < n_points; ++p) {
        std::string failure = point_error[p];
        for (std::size_t s = 0; s < n_snr && failure.empty(); ++s)
            if (!cell_error[p * n_snr + s].empty())
                failure = "snr " + std::to_string(config.snr_grid[s]) + " dB, " + cell_error[p * n_snr + s];
        if (!failure.empty()) {
            result.failures.push_back({p, failure});
            continue;
        }
        const FeedbackConfig& f = config.points[p];
        for (std::size_t s = 0; s < n_snr; ++s) {
            const std::size_t c = p * n_snr + s;
            ResultRow row;
            row.scheme = to_string(f.scheme);
            row.eta_avg = f.average_ratio();
            row.eta_init = f.eta_init;
            row.eta_diff = f.effective_period() > 1 ? f.eta_diff : 0.0;
            row.period_p = f.effective_period();
            row.budget_mode = budget_label(f);
            row.reference_mode = f.effective_period() > 1 ? to_string(f.reference_mode) : "none";
            row.snr_db = config.snr_grid[s];
            row.trials = n_trials;
            row.master_seed = config.master_seed;
            row.point_index = p;
            row.trial_stats.assign(stats.begin() + static_cast<std::ptrdiff_t>(c * n_trials),
                                   stats.begin() + static_cast<std::ptrdiff_t>((c + 1) * n_trials));
            const Aggregate a = aggregate(row.trial_stats, config.nmse_mode);
            row.nmse_linear = a.nmse_linear;
            row.nmse_db = a.nmse_db;
            row.nmse_ci_db = a.ci_db;
            row.excluded_samples = a.excluded;
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

std::string to_string(NmseMode mode) {
    return mode == NmseMode::block ? "block" : "per-slot-mean";
}

NmseMode nmse_mode_from_string(const std::string& s) {
    if (s == "per-slot-mean")
        return NmseMode::per_slot_mean;
    if (s == "block")
        return NmseMode::block;
    throw ConfigError("unknown nmse_mode '" + s + "' (expected per-slot-mean|block)");
}

double parse_snr(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "Inf" || s == "+Inf")
        return kNoiselessSnrDb;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError("invalid SNR value '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v))
        throw ConfigError("invalid SNR value '" + s + "'");
    return v;
}

std::string code_version() {
#ifdef CSFB_VERSION
    return CSFB_VERSION;
#else
    return "unknown";
#endif
}

} // namespace csfb
