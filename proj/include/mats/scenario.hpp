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

#pragma once

// Scenario description and JSON configuration.
//
// Config layout (all keys optional unless noted):
//
//   {
//     "id": "example",
//     "seed": 7,
//     "system": { "n_antennas": 6, "wavelength": 1, "p_tot": 1, "d_min": 0.5,
//                 "region_a": 2, "region": {"x_half": 2, "y_half": 3},
//                 "beta0_db": -40, "alpha": 2.8 },
//     "users": [ {"theta": 0.1, "phi": -0.3, "kappa": 6, "distance": 55,
//                 "noise_power_dbm": -80} ],
//     "user_gen": { "n_users": 5, "distance_range": [50, 70], "kappa": 6,
//                   "noise_power_dbm": -80 },
//     "sweep": { "variable": "p_tot", "values": [0.1, 0.5, 1.0] },
//     "schemes": ["ma_zf", "fpa_zf"],
//     "mc_samples": 20000,
//     "optimizer": { "zeta": 0.5e-4, "max_sweeps": 200 },
//     "output": "out"
//   }
//
// Any key ending in "_db" is converted to a linear ratio and any key ending
// in "_dbm" to watts; the suffix is dropped. "users" and "user_gen" are
// mutually exclusive. A user entry needs either "beta" or "distance".

#include "mats/channel.hpp"
#include "mats/optimizer_trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mats {

enum class Scheme {
    ma_zf,
    ma_mrt,
    fpa_zf,
    fpa_mrt,
    fpa_mrt_opt,  // FPA, MRT directions with optimized powers
    fpa_zf_wf,    // FPA, ZF with water-filling
    fpa_wmmse,
};

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

enum class SweepVar { p_tot, kappa, region_a, n_users };

std::string_view to_string(SweepVar v);
SweepVar sweep_var_from_string(std::string_view name);

struct Sweep {
    SweepVar variable = SweepVar::p_tot;
    std::vector<double> values;
};

struct UserGen {
    int n_users = 5;
    double distance_lo = 50.0;
    double distance_hi = 70.0;
    double kappa = 6.0;
    double noise_power = 1e-11;  // -80 dBm
};

struct Scenario {
    std::string id = "scenario";
    std::uint64_t seed = 1;
    SystemConfig cfg;
    double region_a = 2.0;
    bool region_explicit = false;
    std::optional<UserGen> user_gen;  // unset when users are listed explicitly
    std::vector<UserStats> users;
    std::optional<Sweep> sweep;
    long long mc_samples = 20000;
    std::vector<Scheme> schemes{Scheme::ma_zf, Scheme::ma_mrt, Scheme::fpa_zf, Scheme::fpa_mrt};
    AoOptions optimizer;
    std::string output = "out";

    // Throws DomainError / ConfigError on violation.
    void validate() const;
};

// Linear value of a dB quantity, and watts of a dBm quantity.
double db_to_linear(double db);
double dbm_to_watts(double dbm);

// Parses and validates a JSON document. Users are generated when
// "user_gen" is given (or neither users nor user_gen are present).
// Throws ConfigError on malformed input.
Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);

// Default scenario: N = 6, M = 5, kappa = 6, P = 1 W, A = 2.
Scenario default_scenario(std::uint64_t seed = 1, double kappa = 6.0);

// Draws distances, AoDs, and large-scale gains for skeleton.user_gen;
// deterministic in skeleton.seed. Explicit user lists are returned as is.
Scenario generate_scenario(const Scenario& skeleton);

// Copy of the scenario with the sweep variable set to value.
Scenario at_sweep_point(const Scenario& scenario, double value);

} // namespace mats
