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

// Shared fixtures for the unit tests.

#include "mats/channel.hpp"
#include "mats/scenario.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace mats::testing {

struct RunningStats {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return m2 / static_cast<double>(n - 1); }
    double std_err() const { return std::sqrt(variance() / static_cast<double>(n)); }
};

inline std::vector<UserStats> random_users(int m, double kappa, Rng& rng, double beta = 1.0, double noise = 1.0)
{
    std::uniform_real_distribution<double> ang(-std::numbers::pi / 2, std::numbers::pi / 2);
    std::vector<UserStats> users(static_cast<std::size_t>(m));
    for (auto& u : users) {
        u.theta = ang(rng);
        u.phi = ang(rng);
        u.kappa = kappa;
        u.beta = beta;
        u.noise_power = noise;
    }
    return users;
}

inline SystemConfig small_config(int n, int m, double region_a = 2.0)
{
    SystemConfig cfg;
    cfg.n_antennas = n;
    cfg.n_users = m;
    cfg.wavelength = 1.0;
    cfg.d_min = 0.5;
    cfg.region = region_for_antennas(n, region_a, 1.0);
    return cfg;
}

} // namespace mats::testing
