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

#include <optional>
#include <vector>

namespace mats {

// N x M precoder, column m is w_m.
using BeamformingMatrix = CMatrix;

struct RateReport {
    Eigen::VectorXd sinr;
    Eigen::VectorXd per_user_rate;  // bits/s/Hz
    double sum_rate = 0.0;
};

// SINR of every user for precoder W, user m receiving h_m^H sum_j w_j s_j.
RateReport rate_report(const ChannelMatrix& h, const BeamformingMatrix& w, const Eigen::VectorXd& noise);

double total_power(const BeamformingMatrix& w);

// MRT with the common power factor p = P_tot / sum_m ||h_m||^2.
BeamformingMatrix mrt_beamformer(const ChannelMatrix& h, double p_tot);

// Unit-norm MRT directions h_m / ||h_m|| scaled by sqrt(powers[m]).
BeamformingMatrix mrt_directions(const ChannelMatrix& h, const Eigen::VectorXd& powers);

// Pseudo-inverse ZF directions (unit norm) scaled by sqrt(powers[m]).
// Requires N > M and full column rank, otherwise RankError.
BeamformingMatrix zf_directions(const ChannelMatrix& h, const Eigen::VectorXd& powers);

// ZF with equal power P_tot / M.
BeamformingMatrix zf_beamformer(const ChannelMatrix& h, double p_tot);

// Effective ZF gains g_m = 1 / [(H^H H)^-1]_mm.
Eigen::VectorXd zf_gains(const ChannelMatrix& h);

// Classic water-filling: maximize sum log2(1 + p_m a_m) s.t. sum p_m = P,
// p_m >= 0, for positive channel-to-noise ratios a_m.
Eigen::VectorXd water_fill(const Eigen::VectorXd& cnr, double p_tot);

// Water-filling over the ZF gains divided by the per-user noise power.
Eigen::VectorXd zf_waterfilling_power(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise);

// ZF directions with water-filled powers.
BeamformingMatrix zf_waterfilling_beamformer(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise);

struct PowerOptResult {
    Eigen::VectorXd powers;
    std::vector<double> trace;  // sum rate after every accepted step
};

// MRT directions with powers chosen by projected gradient ascent of the
// instantaneous sum rate over the simplex {p >= 0, sum p = P_tot}. Starts
// from equal powers; a step is kept only if the sum rate does not drop.
PowerOptResult mrt_power_optimization(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                                      int steps = 500);

BeamformingMatrix mrt_optimized_power_beamformer(const ChannelMatrix& h, double p_tot,
                                                 const Eigen::VectorXd& noise, int steps = 500);

// Euclidean projection onto {p >= 0, sum p = total}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double total);

struct WmmseOptions {
    int max_iters = 200;
    double rel_tol = 1e-8;
};

struct WmmseResult {
    BeamformingMatrix w;
    std::vector<double> trace;  // sum rate of the initial point followed by each iterate
    int iterations = 0;
};

// Weighted MMSE iteration for the downlink sum rate under a total power
// constraint. Throws DomainError for an all-zero initial precoder.
WmmseResult wmmse(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                  const BeamformingMatrix& initial, const WmmseOptions& options = {});

// WMMSE started from the MRT precoder and, when N > M and H has full rank,
// from the equal-power ZF precoder; the better of the runs is returned.
WmmseResult wmmse_baseline(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                           const WmmseOptions& options = {});

} // namespace mats
