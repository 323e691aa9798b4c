// SPDX-License-Identifier: Apache-2.0
//
// mats - two-timescale movable-antenna MU-MIMO design library
// Copyright (C) 2026 The mats authors
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

#include "mats/scenario.hpp"
#include "mats/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace mats {

using nlohmann::json;

namespace {

constexpr std::uint64_t kUserStream = 0x75736572;  // "user"

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Rewrites *_db / *_dbm keys to linear units, recursively.
json normalize_units(const json& in, const std::string& path)
{
    if (in.is_array()) {
        json out = json::array();
        for (std::size_t i = 0; i < in.size(); ++i) {
            out.push_back(normalize_units(in[i], path + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    if (!in.is_object()) {
        return in;
    }
    json out = json::object();
    for (const auto& [key, value] : in.items()) {
        std::string base = key;
        json converted = normalize_units(value, path + "." + key);
        if (ends_with(key, "_dbm") || ends_with(key, "_db")) {
            const bool dbm = ends_with(key, "_dbm");
            base = key.substr(0, key.size() - (dbm ? 4 : 3));
            if (!value.is_number()) {
                throw ConfigError(path + "." + key + ": expected a number");
            }
            const double v = value.get<double>();
            converted = dbm ? dbm_to_watts(v) : db_to_linear(v);
        }
        if (out.contains(base)) {
            throw ConfigError(path + "." + base + ": given more than once (linear and dB forms)");
        }
        out[base] = converted;
    }
    return out;
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& path)
{
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key + ": " + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path)
{
    if (!obj.is_object()) {
        throw ConfigError(path + ": expected an object");
    }
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(path + ": unknown key '" + key + "'");
        }
    }
}

UserStats parse_user(const json& j, const SystemConfig& cfg, const std::string& path)
{
    reject_unknown(j, {"theta", "phi", "kappa", "beta", "distance", "noise_power"}, path);
    UserStats u;
    u.theta = get_or<double>(j, "theta", 0.0, path);
    u.phi = get_or<double>(j, "phi", 0.0, path);
    u.kappa = get_or<double>(j, "kappa", 0.0, path);
    u.noise_power = get_or<double>(j, "noise_power", 1e-11, path);
    if (j.contains("distance")) {
        u.distance = get_or<double>(j, "distance", 0.0, path);
        u.beta = large_scale_fading(u.distance, cfg.beta0, cfg.alpha);
    }
    if (j.contains("beta")) {
        u.beta = get_or<double>(j, "beta", 0.0, path);
    } else if (!j.contains("distance")) {
        throw ConfigError(path + ": needs either 'beta' or 'distance'");
    }
    return u;
}

} // namespace

std::string_view to_string(Scheme s)
{
    switch (s) {
    case Scheme::ma_zf:
        return "ma_zf";
    case Scheme::ma_mrt:
        return "ma_mrt";
    case Scheme::fpa_zf:
        return "fpa_zf";
    case Scheme::fpa_mrt:
        return "fpa_mrt";
    case Scheme::fpa_mrt_opt:
        return "fpa_mrt_opt";
    case Scheme::fpa_zf_wf:
        return "fpa_zf_wf";
    case Scheme::fpa_wmmse:
        return "fpa_wmmse";
    }
    return "?";
}

Scheme scheme_from_string(std::string_view name)
{
    for (auto s : {Scheme::ma_zf, Scheme::ma_mrt, Scheme::fpa_zf, Scheme::fpa_mrt, Scheme::fpa_mrt_opt,
                   Scheme::fpa_zf_wf, Scheme::fpa_wmmse}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(SweepVar v)
{
    switch (v) {
    case SweepVar::p_tot:
        return "p_tot";
    case SweepVar::kappa:
        return "kappa";
    case SweepVar::region_a:
        return "region_A";
    case SweepVar::n_users:
        return "n_users";
    }
    return "?";
}

SweepVar sweep_var_from_string(std::string_view name)
{
    for (auto v : {SweepVar::p_tot, SweepVar::kappa, SweepVar::region_a, SweepVar::n_users}) {
        if (to_string(v) == name) {
            return v;
        }
    }
    throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

double dbm_to_watts(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

void Scenario::validate() const
{
    if (id.empty() || id.find_first_of(",\"\r\n") != std::string::npos) {
        throw ConfigError("scenario: id must be nonempty and free of commas, quotes, and newlines");
    }
    if (schemes.empty()) {
        throw ConfigError("scenario: schemes must be nonempty");
    }
    if (mc_samples < 100) {
        throw ConfigError("scenario: mc_samples must be >= 100");
    }
    if (users.empty() && !user_gen) {
        throw ConfigError("scenario: no users");
    }
    if (!users.empty() && static_cast<int>(users.size()) != cfg.n_users) {
        throw ConfigError("scenario: cfg.n_users does not match the user list");
    }
    cfg.validate();
    for (const auto& u : users) {
        u.validate();
    }
    if (user_gen) {
        if (user_gen->n_users < 1 || !(user_gen->distance_lo > 0.0) ||
            !(user_gen->distance_hi >= user_gen->distance_lo) || !(user_gen->kappa >= 0.0) ||
            !(user_gen->noise_power > 0.0)) {
            throw ConfigError("scenario: invalid user_gen");
        }
    }
    if (sweep) {
        if (sweep->values.empty()) {
            throw ConfigError("scenario: sweep values must be nonempty");
        }
        for (std::size_t i = 1; i < sweep->values.size(); ++i) {
            if (!(sweep->values[i] > sweep->values[i - 1])) {
                throw ConfigError("scenario: sweep values must be strictly increasing");
            }
        }
        if (sweep->variable == SweepVar::n_users && !user_gen) {
            throw ConfigError("scenario: an n_users sweep needs user_gen");
        }
    }
}

Scenario load_scenario(std::string_view json_text)
{
    json raw;
    try {
        raw = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const json doc = normalize_units(raw, "$");
    reject_unknown(doc, {"id", "seed", "system", "users", "user_gen", "sweep", "schemes", "mc_samples", "optimizer",
                         "output"},
                   "$");
    Scenario sc;
    sc.id = get_or<std::string>(doc, "id", sc.id, "$");
    sc.seed = get_or<std::uint64_t>(doc, "seed", sc.seed, "$");
    sc.mc_samples = get_or<long long>(doc, "mc_samples", sc.mc_samples, "$");
    sc.output = get_or<std::string>(doc, "output", sc.output, "$");

    const json sys = doc.value("system", json::object());
    reject_unknown(sys, {"n_antennas", "wavelength", "p_tot", "d_min", "region_a", "region", "beta0", "alpha"},
                   "$.system");
    auto& cfg = sc.cfg;
    cfg.n_antennas = get_or<int>(sys, "n_antennas", cfg.n_antennas, "$.system");
    cfg.wavelength = get_or<double>(sys, "wavelength", cfg.wavelength, "$.system");
    cfg.p_tot = get_or<double>(sys, "p_tot", cfg.p_tot, "$.system");
    cfg.d_min = get_or<double>(sys, "d_min", cfg.wavelength / 2.0, "$.system");
    cfg.beta0 = get_or<double>(sys, "beta0", cfg.beta0, "$.system");
    cfg.alpha = get_or<double>(sys, "alpha", cfg.alpha, "$.system");
    sc.region_a = get_or<double>(sys, "region_a", sc.region_a, "$.system");
    if (sys.contains("region")) {
        const json& r = sys.at("region");
        reject_unknown(r, {"x_half", "y_half"}, "$.system.region");
        cfg.region.x_half = get_or<double>(r, "x_half", 0.0, "$.system.region");
        cfg.region.y_half = get_or<double>(r, "y_half", 0.0, "$.system.region");
        sc.region_explicit = true;
    } else {
        try {
            cfg.region = region_for_antennas(cfg.n_antennas, sc.region_a, cfg.wavelength);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("$.system: ") + e.what());
        }
    }

    if (doc.contains("users") && doc.contains("user_gen")) {
        throw ConfigError("$: 'users' and 'user_gen' are mutually exclusive");
    }
    if (doc.contains("users")) {
        const json& us = doc.at("users");
        if (!us.is_array() || us.empty()) {
            throw ConfigError("$.users: expected a nonempty array");
        }
        for (std::size_t i = 0; i < us.size(); ++i) {
            sc.users.push_back(parse_user(us[i], cfg, "$.users[" + std::to_string(i) + "]"));
        }
        cfg.n_users = static_cast<int>(sc.users.size());
    } else {
        const json g = doc.value("user_gen", json::object());
        reject_unknown(g, {"n_users", "distance_range", "kappa", "noise_power"}, "$.user_gen");
        UserGen gen;
        gen.n_users = get_or<int>(g, "n_users", gen.n_users, "$.user_gen");
        gen.kappa = get_or<double>(g, "kappa", gen.kappa, "$.user_gen");
        gen.noise_power = get_or<double>(g, "noise_power", gen.noise_power, "$.user_gen");
        if (g.contains("distance_range")) {
            const auto range = get_or<std::vector<double>>(g, "distance_range", {}, "$.user_gen");
            if (range.size() != 2) {
                throw ConfigError("$.user_gen.distance_range: expected [lo, hi]");
            }
            gen.distance_lo = range[0];
            gen.distance_hi = range[1];
        }
        sc.user_gen = gen;
        cfg.n_users = gen.n_users;
    }

    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        reject_unknown(s, {"variable", "values"}, "$.sweep");
        Sweep sw;
        sw.variable = sweep_var_from_string(get_or<std::string>(s, "variable", "", "$.sweep"));
        sw.values = get_or<std::vector<double>>(s, "values", {}, "$.sweep");
        sc.sweep = sw;
    }
    if (doc.contains("schemes")) {
        sc.schemes.clear();
        for (const auto& name : get_or<std::vector<std::string>>(doc, "schemes", {}, "$")) {
            sc.schemes.push_back(scheme_from_string(name));
        }
    }
    if (doc.contains("optimizer")) {
        const json& o = doc.at("optimizer");
        reject_unknown(o, {"zeta", "max_sweeps", "tol"}, "$.optimizer");
        sc.optimizer.zeta = get_or<double>(o, "zeta", sc.optimizer.zeta, "$.optimizer");
        sc.optimizer.max_sweeps = get_or<int>(o, "max_sweeps", sc.optimizer.max_sweeps, "$.optimizer");
        sc.optimizer.subsolver.tol = get_or<double>(o, "tol", sc.optimizer.subsolver.tol, "$.optimizer");
    }

    Scenario out = generate_scenario(sc);
    try {
        out.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return out;
}

Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

Scenario default_scenario(std::uint64_t seed, double kappa)
{
    Scenario sc;
    sc.id = "default";
    sc.seed = seed;
    sc.cfg.region = region_for_antennas(sc.cfg.n_antennas, sc.region_a, sc.cfg.wavelength);
    UserGen gen;
    gen.kappa = kappa;
    sc.user_gen = gen;
    sc.cfg.n_users = gen.n_users;
    return generate_scenario(sc);
}

Scenario generate_scenario(const Scenario& skeleton)
{
    Scenario sc = skeleton;
    if (!sc.user_gen) {
        return sc;
    }
    const UserGen& g = *sc.user_gen;
    Rng rng = make_stream(sc.seed, kUserStream);
    std::uniform_real_distribution<double> dist(g.distance_lo, g.distance_hi);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    sc.users.clear();
    for (int m = 0; m < g.n_users; ++m) {
        UserStats u;
        u.distance = dist(rng);
        u.theta = angle(rng);
        u.phi = angle(rng);
        u.kappa = g.kappa;
        u.noise_power = g.noise_power;
        u.beta = large_scale_fading(u.distance, sc.cfg.beta0, sc.cfg.alpha);
        sc.users.push_back(u);
    }
    sc.cfg.n_users = g.n_users;
    return sc;
}

Scenario at_sweep_point(const Scenario& scenario, double value)
{
    if (!scenario.sweep) {
        throw ConfigError("at_sweep_point: scenario has no sweep");
    }
    Scenario sc = scenario;
    switch (scenario.sweep->variable) {
    case SweepVar::p_tot:
        sc.cfg.p_tot = value;
        break;
    case SweepVar::kappa:
        for (auto& u : sc.users) {
            u.kappa = value;
        }
        if (sc.user_gen) {
            sc.user_gen->kappa = value;
        }
        break;
    case SweepVar::region_a:
        sc.region_a = value;
        sc.cfg.region = region_for_antennas(sc.cfg.n_antennas, value, sc.cfg.wavelength);
        break;
    case SweepVar::n_users: {
        const double r = std::round(value);
        if (r < 1.0 || std::abs(r - value) > 1e-9) {
            throw ConfigError("at_sweep_point: n_users must be a positive integer");
        }
        // Users are drawn sequentially from one stream, so the first M
        // users coincide across points.
        sc.user_gen->n_users = static_cast<int>(r);
        sc = generate_scenario(sc);
        break;
    }
    }
    sc.validate();
    return sc;
}

} // namespace mats
