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

#include "mats/channel.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace mats {

enum class ErgodicKind { mrt_approx, zf_lower_bound, monte_carlo };

struct ErgodicReport {
    Eigen::VectorXd per_user;  // bits/s/Hz
    double sum = 0.0;
    ErgodicKind kind = ErgodicKind::mrt_approx;
    std::optional<Eigen::VectorXd> mc_std_err;  // per user, Monte-Carlo only
    std::optional<double> sum_std_err;          // Monte-Carlo only
    long long resamples = 0;                    // draws redrawn after a beamformer failure
    long long samples = 0;
};

// Statistics-only quantities entering the ZF lower bound for one layout.
struct ZfStatsCache {
    Eigen::VectorXd omega;    // kappa_m
    Eigen::VectorXd lambda1;  // 1 / (kappa_m + 1)
    Eigen::VectorXd lambda2;  // sqrt(kappa_m / (kappa_m + 1))
    CMatrix hbar;             // N x M LoS matrix
    CMatrix sigma;            // Lambda1 + (1/N) Lambda2 Hbar^H Hbar Lambda2
};

// E||h_m||^4 = beta_m^2 (N^2 + (2 N kappa_m + N) / (kappa_m + 1)^2).
double mrt_signal_moment(const UserStats& user, int n_antennas);

// E|h_j^H h_m|^2 for j != m, with cross_los = |hbar_j^H hbar_m|^2.
double mrt_interference_moment(const UserStats& user_m, const UserStats& user_j, double cross_los,
                               int n_antennas);

// Closed-form MRT ergodic-rate approximation (ratio of expectations).
ErgodicReport mrt_ergodic_approx(const AntennaLayout& layout, std::span<const UserStats> users,
                                 const SystemConfig& cfg);

ZfStatsCache zf_sigma(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength);

// Jensen lower bound of the ZF ergodic rate with equal power P_tot / M.
// Throws RankError when N <= M.
ErgodicReport zf_ergodic_lower_bound(const AntennaLayout& layout, std::span<const UserStats> users,
                                     const SystemConfig& cfg);

enum class Beamformer {
    mrt,              // fixed power P_tot / sum ||h||^2
    zf,               // equal power
    zf_waterfilling,  // ZF with water-filled powers
    mrt_power_opt,    // MRT directions, powers by projected gradient
    wmmse,
};

std::string_view to_string(Beamformer b);
Beamformer beamformer_from_string(std::string_view name);

struct McOptions {
    long long n_samples = 20000;
    std::uint64_t seed = 1;
    int threads = 1;
    // Draws are grouped into fixed-size chunks with one RNG stream each, so
    // results do not depend on the thread count.
    long long chunk = 1000;
};

// Monte-Carlo estimate of the ergodic rate with the given small-timescale
// beamformer. Throws DomainError when n_samples < 100.
ErgodicReport mc_ergodic_rate(const AntennaLayout& layout, std::span<const UserStats> users,
                              const SystemConfig& cfg, Beamformer beamformer, const McOptions& options);

} // namespace mats
