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

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace csfb {

namespace {

std::string fixed(double v, int digits) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    // avoid "-0.0000"
    if (std::string(buf).find_first_not_of("-0.") == std::string::npos)
        std::snprintf(buf, sizeof buf, "%.*f", digits, 0.0);
    return buf;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string format_table(std::span<const ResultRow> rows) {
    std::ostringstream os;
    os << kResultColumns << '\n';
    for (const auto& r : rows) {
        os << r.scheme << ',' << fixed(r.eta_avg, 4) << ',' << fixed(r.eta_init, 4) << ',' << fixed(r.eta_diff, 4)
           << ',' << r.period_p << ',' << r.budget_mode << ',' << r.reference_mode << ',' << fixed(r.snr_db, 2)
           << ',' << fixed(r.nmse_db, 4) << ',' << fixed(r.nmse_ci_db, 4) << ',' << r.trials << ','
           << r.excluded_samples << ',' << r.master_seed << '\n';
    }
    return os.str();
}

void emit_results(std::span<const ResultRow> rows, const std::filesystem::path& path,
                  const ExperimentConfig& config) {
    if (rows.empty())
        throw std::invalid_argument("emit_results: no rows to write");
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write results table '" + path.string() + "'");
        out << format_table(rows);
        if (!out)
            throw IoError("failed while writing results table '" + path.string() + "'");
    }
    nlohmann::json meta = nlohmann::json::object();
    meta["config"] = nlohmann::json::parse(config_to_json(config));
    meta["code_version"] = code_version();
    meta["timestamp"] = utc_timestamp();
    // seed descriptors of every sensing operator, so a matrix can be rebuilt
    // without rerunning the sweep
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& f : config.points) {
        std::vector<double> etas = {f.eta_init};
        if (f.effective_period() > 1)
            etas.push_back(f.eta_diff);
        for (double eta : etas) {
            const std::size_t m = measurements_for_ratio(eta, config.channel.taps);
            const SensingMatrix phi = sensing_matrix_for(m, config.channel.taps, config.master_seed);
            nlohmann::json op = {{"m", phi.m}, {"l", phi.l}, {"seed", phi.seed.seed()},
                                 {"stream_id", phi.seed.stream_id()}};
            if (std::find(ops.begin(), ops.end(), op) == ops.end())
                ops.push_back(op);
        }
    }
    meta["sensing_matrices"] = ops;
    meta["columns"] = kResultColumns;
    meta["rows"] = rows.size();
    std::filesystem::path meta_path = path;
    meta_path += ".meta.json";
    std::ofstream out(meta_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write metadata '" + meta_path.string() + "'");
    out << meta.dump(2) << '\n';
    if (!out)
        throw IoError("failed while writing metadata '" + meta_path.string() + "'");
}

} // namespace csfb
