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

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <optional>

namespace {

struct RunOptions {
    std::string config_path;
    std::vector<std::string> snr;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string scheme;
    std::string out;
    std::optional<std::size_t> threads;
    bool print_config = false;
};

void apply_overrides(csfb::ExperimentConfig& config, const RunOptions& opt) {
    if (!opt.snr.empty()) {
        config.snr_grid.clear();
        for (const auto& s : opt.snr)
            config.snr_grid.push_back(csfb::parse_snr(s));
    }
    if (opt.trials)
        config.trials = *opt.trials;
    if (opt.seed)
        config.master_seed = *opt.seed;
    if (opt.threads)
        config.threads = *opt.threads;
    if (!opt.scheme.empty()) {
        const csfb::Scheme keep = csfb::scheme_from_string(opt.scheme);
        std::erase_if(config.points, [&](const csfb::FeedbackConfig& f) { return f.scheme != keep; });
        if (config.points.empty())
            throw csfb::ConfigError("no sweep point uses scheme '" + opt.scheme + "'");
    }
    config.validate();
}

int execute(const csfb::ExperimentConfig& config, const RunOptions& opt) {
    if (opt.print_config) {
        std::cout << csfb::config_to_json(config) << '\n';
        return 0;
    }
    const csfb::SweepResult result = csfb::run_sweep(config);
    for (const auto& f : result.failures)
        std::cerr << "error: sweep point " << f.point_index << " failed: " << f.message << '\n';
    if (result.rows.empty()) {
        std::cerr << "error: no sweep point completed\n";
        return 2;
    }
    if (opt.out.empty())
        std::cout << csfb::format_table(result.rows);
    else
        csfb::emit_results(result.rows, opt.out, config);
    return result.failures.empty() ? 0 : 2;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--snr", opt.snr, "SNR grid in dB, comma separated; 'inf' for noiseless")->delimiter(',');
    cmd->add_option("--trials", opt.trials, "Monte Carlo trials per sweep point");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--scheme", opt.scheme, "keep only points of this scheme")
        ->check(CLI::IsMember({"direct", "differential"}));
    cmd->add_option("--out", opt.out, "results table path (a .meta.json sidecar is written next to it)");
    cmd->add_option("--threads", opt.threads, "worker threads (0: all cores, capped by CSFB_THREADS)");
    cmd->add_flag("--print-config", opt.print_config, "print the resolved configuration and exit");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressive-sensing differential channel feedback simulator"};
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "run a configured sweep");
    run->add_option("--config", run_opt.config_path, "experiment configuration (JSON)")->required();
    add_run_flags(run, run_opt);

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "parse and check a configuration without running it");
    validate->add_option("--config", validate_path, "experiment configuration (JSON)")->required();

    RunOptions demo_opt;
    CLI::App* demo = app.add_subcommand("demo", "run the pinned default configuration");
    add_run_flags(demo, demo_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            csfb::ExperimentConfig config = csfb::load_config(run_opt.config_path);
            apply_overrides(config, run_opt);
            return execute(config, run_opt);
        }
        if (*validate) {
            const csfb::ExperimentConfig config = csfb::load_config(validate_path);
            std::cout << "ok: " << config.points.size() << " sweep points x " << config.snr_grid.size()
                      << " SNR values, " << config.trials << " trials\n";
            return 0;
        }
        if (*demo) {
            csfb::ExperimentConfig config = csfb::default_experiment();
            apply_overrides(config, demo_opt);
            return execute(config, demo_opt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
