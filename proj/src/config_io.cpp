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

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace csfb {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys = {
    "taps",      "mu",           "p01",        "doppler_hz", "slot_s",    "sigma_w",        "antennas",
    "trials",    "trial_offset", "horizon_t",  "snr_grid",   "master_seed", "nmse_mode",    "threads",
    "sp_max_iters", "sp_tol",    "reference_mode", "points"};

const std::set<std::string> kPointKeys = {"scheme",      "eta_init",    "eta_diff",      "period_p",
                                          "budget_init", "budget_diff", "reference_mode"};

template <typename T>
T get_as(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key))
        return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: key '" + key + "' has the wrong type: " + e.what());
    }
}

std::size_t get_count(const json& obj, const std::string& key, std::size_t fallback) {
    if (!obj.contains(key))
        return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError("config: key '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

double snr_from_json(const json& v) {
    if (v.is_number())
        return v.get<double>();
    if (v.is_string())
        return parse_snr(v.get<std::string>());
    throw ConfigError("config: snr_grid entries must be numbers or \"inf\"");
}

json snr_to_json(double snr) {
    if (std::isinf(snr))
        return "inf";
    return snr;
}

// "oracle", "fixed", "fixed:N", "energy", "energy:F"
BudgetRule parse_budget(const std::string& s, std::size_t default_k) {
    BudgetRule r;
    r.fixed_k = default_k;
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
    r.mode = budget_mode_from_string(head);
    if (tail.empty())
        return r;
    try {
        std::size_t used = 0;
        if (r.mode == BudgetMode::fixed) {
            const long long k = std::stoll(tail, &used);
            if (k < 1)
                throw ConfigError("fixed budget must be at least 1");
            r.fixed_k = static_cast<std::size_t>(k);
        } else if (r.mode == BudgetMode::energy) {
            r.energy_fraction = std::stod(tail, &used);
        } else {
            throw ConfigError("oracle budget takes no argument");
        }
        if (used != tail.size())
            throw ConfigError("trailing characters");
    } catch (const ConfigError& e) {
        throw ConfigError("config: invalid budget '" + s + "': " + e.what());
    } catch (const std::exception&) {
        throw ConfigError("config: invalid budget '" + s + "'");
    }
    return r;
}

json budget_to_json(const BudgetRule& r) {
    switch (r.mode) {
    case BudgetMode::oracle: return "oracle";
    case BudgetMode::fixed: return "fixed:" + std::to_string(r.fixed_k);
    case BudgetMode::energy: {
        // shortest text that parses back to the same double
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, r.energy_fraction).ptr;
        return "energy:" + std::string(buf, end);
    }
    }
    return "oracle";
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("config: top level must be an object");
    reject_unknown(doc, kTopLevelKeys, "top level");

    ExperimentConfig c;
    const ChannelParams d = c.channel;
    try {
        c.channel = ChannelParams::make(get_count(doc, "taps", d.taps), get_as(doc, "mu", d.mu),
                                        get_as(doc, "p01", d.p01), get_as(doc, "doppler_hz", d.doppler_hz),
                                        get_as(doc, "slot_s", d.slot_s), get_as(doc, "sigma_w", d.sigma_w));
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.antennas = get_count(doc, "antennas", c.antennas);
    c.trials = get_count(doc, "trials", c.trials);
    c.trial_offset = get_count(doc, "trial_offset", c.trial_offset);
    c.horizon_t = get_count(doc, "horizon_t", c.horizon_t);
    c.threads = get_count(doc, "threads", c.threads);
    if (doc.contains("master_seed")) {
        const json& s = doc.at("master_seed");
        if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
            c.master_seed = s.get<std::uint64_t>();
        else if (s.is_string())
            c.master_seed = std::stoull(s.get<std::string>());
        else
            throw ConfigError("config: master_seed must be a non-negative integer");
    }
    if (doc.contains("nmse_mode"))
        c.nmse_mode = nmse_mode_from_string(get_as<std::string>(doc, "nmse_mode", ""));
    if (doc.contains("snr_grid")) {
        const json& g = doc.at("snr_grid");
        if (!g.is_array())
            throw ConfigError("config: snr_grid must be an array");
        c.snr_grid.clear();
        for (const auto& v : g)
            c.snr_grid.push_back(snr_from_json(v));
    }

    RecoveryOptions solver;
    solver.max_iters = get_count(doc, "sp_max_iters", 0);
    solver.tol = get_as(doc, "sp_tol", solver.tol);
    const ReferenceMode default_ref = doc.contains("reference_mode")
                                          ? reference_mode_from_string(get_as<std::string>(doc, "reference_mode", ""))
                                          : ReferenceMode::true_previous;

    const auto init_k =
        static_cast<std::size_t>(std::max(1LL, std::llround(c.channel.mu * static_cast<double>(c.channel.taps))));
    const std::size_t diff_k = default_differential_budget(c.channel.mu, c.channel.taps, c.channel.p01);

    if (doc.contains("points")) {
        const json& pts = doc.at("points");
        if (!pts.is_array())
            throw ConfigError("config: points must be an array");
        c.points.clear();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const json& p = pts[i];
            if (!p.is_object())
                throw ConfigError("config: points[" + std::to_string(i) + "] must be an object");
            reject_unknown(p, kPointKeys, "points[" + std::to_string(i) + "]");
            FeedbackConfig f;
            f.scheme = scheme_from_string(get_as<std::string>(p, "scheme", "differential"));
            f.eta_init = get_as(p, "eta_init", f.eta_init);
            f.eta_diff = get_as(p, "eta_diff", f.eta_diff);
            f.period_p = get_count(p, "period_p", f.period_p);
            if (f.scheme == Scheme::direct) {
                f.period_p = 1;
                f.eta_diff = 0.0;
            }
            f.budget_init = parse_budget(get_as<std::string>(p, "budget_init", "oracle"), init_k);
            f.budget_diff = parse_budget(get_as<std::string>(p, "budget_diff", "oracle"), diff_k);
            f.reference_mode = p.contains("reference_mode")
                                   ? reference_mode_from_string(get_as<std::string>(p, "reference_mode", ""))
                                   : default_ref;
            f.solver = solver;
            f.horizon_t = c.horizon_t;
            c.points.push_back(f);
        }
    } else {
        c.points = default_points(c.channel);
        for (auto& f : c.points) {
            f.solver = solver;
            f.reference_mode = default_ref;
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc = json::object();
    doc["taps"] = c.channel.taps;
    doc["mu"] = c.channel.mu;
    doc["p01"] = c.channel.p01;
    doc["doppler_hz"] = c.channel.doppler_hz;
    doc["slot_s"] = c.channel.slot_s;
    doc["sigma_w"] = c.channel.sigma_w;
    doc["antennas"] = c.antennas;
    doc["trials"] = c.trials;
    doc["trial_offset"] = c.trial_offset;
    doc["horizon_t"] = c.horizon_t;
    json grid = json::array();
    for (double s : c.snr_grid)
        grid.push_back(snr_to_json(s));
    doc["snr_grid"] = grid;
    doc["master_seed"] = c.master_seed;
    doc["nmse_mode"] = to_string(c.nmse_mode);
    doc["threads"] = c.threads;
    if (!c.points.empty()) {
        doc["sp_max_iters"] = c.points.front().solver.max_iters;
        doc["sp_tol"] = c.points.front().solver.tol;
    }
    json pts = json::array();
    for (const auto& f : c.points) {
        json p = json::object();
        p["scheme"] = to_string(f.scheme);
        p["eta_init"] = f.eta_init;
        if (f.scheme == Scheme::differential) {
            p["eta_diff"] = f.eta_diff;
            p["period_p"] = f.period_p;
            p["budget_diff"] = budget_to_json(f.budget_diff);
            p["reference_mode"] = to_string(f.reference_mode);
        }
        p["budget_init"] = budget_to_json(f.budget_init);
        pts.push_back(p);
    }
    doc["points"] = pts;
    return doc.dump(2);
}

} // namespace csfb
