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

// Antenna-wise position optimization for ZF precoding.
//
// Antenna n enters Sigma(t) only through a rank-one term built from
// g = gbar_n(t_n) (the conjugated n-th row of the LoS matrix). A Woodbury
// update turns [Sigma^-1]_mm into the Rayleigh-quotient ratio
// g^H X_m g / g^H Y g, so the per-user lower bound becomes
// log2(1 + eta_m g^H Y g / g^H X_m g). The ratio is minorized in two steps:
// a tangent plane of the jointly convex quadratic-over-linear function,
// followed by X_m <= lambda_max(X_m) I on the unit-modulus vector g. The
// result is chi_m + F_m(t) with F_m a sum of cosines, which is in turn
// minorized by a quadratic with curvature xi_m.

#include "mats/channel.hpp"
#include "mats/optimizer_trace.hpp"
#include "mats/subsolver.hpp"

#include <span>
#include <vector>

namespace mats {

struct ZfPerAntennaCache {
    int antenna = 0;
    int n_antennas = 0;
    double wave_number = 0.0;
    Vec2 expansion_point = Vec2::Zero();
    std::vector<Vec2> directions;  // a_u
    Eigen::VectorXd lambda2;
    CVector gbar;                  // gbar_n at the expansion point
    CMatrix theta1;                // sum over frozen antennas of gbar_i gbar_i^H
    CMatrix theta2;
    CMatrix theta2_inv;
    CMatrix y;
    CMatrix l;                     // column m is l_{n,m}
    std::vector<CMatrix> x;        // X_{n,m}
    Eigen::VectorXd lam_max_x;
    Eigen::VectorXd eta;
    double woodbury_residual = 0.0;  // relative, vs. dense inversion of Sigma

    int n_users() const { return static_cast<int>(eta.size()); }
};

struct ZfSurrogateTerms {
    Eigen::VectorXd chi;
    CMatrix q;                  // row m is q_{n,m}
    Eigen::VectorXd f_ref;      // F_m at the expansion point
    std::vector<Vec2> f_grad;   // grad F_m at the expansion point
    Eigen::VectorXd xi;
};

// gbar_n(t) entries exp(-j k t^T a_u).
CVector gbar_at(const Vec2& t, const ZfPerAntennaCache& cache);

// Throws RankError when N <= M and NumericalRankError when Theta2 is
// numerically singular.
ZfPerAntennaCache build_cache(const AntennaLayout& layout, std::span<const UserStats> users,
                              const SystemConfig& cfg, int n);

// Dense Sigma^-1 for the layout with antenna n moved to t (oracle path).
CMatrix sigma_inverse_direct(const ZfPerAntennaCache& cache, const Vec2& t);

// Woodbury form Theta2^-1 - Theta2^-1 L2 g g^H L2 Theta2^-1 / (N + g^H L2 Theta2^-1 L2 g).
CMatrix sigma_inverse_woodbury(const ZfPerAntennaCache& cache, const Vec2& t);

// g^H X_m g / g^H Y g, i.e. [Sigma^-1]_mm.
double sigma_inv_mm(const ZfPerAntennaCache& cache, int m, const CVector& g);

// Per-user lower bound with antenna n at t (default: the expansion point).
// Throws InvariantError if the quotient denominator is not positive.
double rate_lb1(const ZfPerAntennaCache& cache, int m, const Vec2& t);
double rate_lb1(const ZfPerAntennaCache& cache, int m);

// f_{n,m}(g_at) expanded at g_ref.
double mm_minorizer(const ZfPerAntennaCache& cache, int m, const CVector& g_at, const CVector& g_ref);

ZfSurrogateTerms zf_surrogate_terms(const ZfPerAntennaCache& cache);

double f_value(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m);
Vec2 f_gradient(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m);
Eigen::Matrix2d f_hessian(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m);

Eigen::Matrix2d xi_matrix(const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m);
double xi_bound(const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m);

// Value of the concave surrogate; -inf outside the log domain.
double zf_surrogate_value(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms,
                          Vec2* grad = nullptr);

// Sum of rate_lb1 over users with antenna n at t.
double zf_objective_at(const Vec2& t, const ZfPerAntennaCache& cache);

struct ZfSubproblem {
    ZfPerAntennaCache cache;
    ZfSurrogateTerms terms;
    Subproblem2D problem;
};

ZfSubproblem build_zf_subproblem(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg,
                       int n, double curvature_scale = 1.0);

// Half-planes of a regular polygon inscribed in the disc |t - centre| <= radius.
std::vector<HalfPlane> trust_region_polygon(const Vec2& centre, double radius, int sides = 16);

struct ZfOptimizationResult {
    AntennaLayout layout;
    OptimizerTrace trace;
    int trust_region_retries = 0;
};

// Sum of the ZF ergodic-rate lower bound.
double zf_true_objective(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg);

ZfOptimizationResult optimize_zf(const AntennaLayout& layout0, std::span<const UserStats> users,
                                 const SystemConfig& cfg, const AoOptions& options = {});

} // namespace mats
