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

// Antenna-wise position optimization for MRT precoding.
//
// With every antenna but n frozen, the closed-form MRT ergodic rate of user
// m is log2(1 + c2_m / (b_m(t_n) + c3_m)), where
//
//   b_m(t) = 2 sum_{j != m} c1_mj |tau_mj| cos(k t^T (a_m - a_j) - arg tau_mj)
//
// and tau_mj sums the LoS phasors of the frozen antennas. The rate is
// convex in b_m, so its tangent is a global minorizer; b_m itself is
// majorized by a quadratic with curvature psi_m >= lambda_max(Hessian).
// Chaining both gives a concave quadratic in t_n that touches the true
// objective at the expansion point.

#include "mats/channel.hpp"
#include "mats/optimizer_trace.hpp"
#include "mats/subsolver.hpp"

#include <span>

namespace mats {

struct MrtSurrogateTerms {
    int antenna = 0;
    double wave_number = 0.0;  // 2 pi / lambda
    Vec2 expansion_point = Vec2::Zero();
    Eigen::MatrixXd ax;   // (a_m - a_j).x
    Eigen::MatrixXd ay;   // (a_m - a_j).y
    Eigen::MatrixXcd tau; // tau_{n,m,j}, diagonal unused
    Eigen::MatrixXd c1;   // c_{1,m,j}, zero on the diagonal
    Eigen::VectorXd c2;
    Eigen::VectorXd c3;
    Eigen::VectorXd b_ref;       // b_m at the expansion point
    std::vector<Vec2> grad_ref;  // grad b_m at the expansion point
    Eigen::VectorXd psi;

    int n_users() const { return static_cast<int>(c2.size()); }
};

// sum_{i != n} exp(j k t_i^T (a_m - a_j)).
cdouble tau(const AntennaLayout& layout, std::span<const UserStats> users, int n, int m, int j, double wavelength);

MrtSurrogateTerms mrt_surrogate_terms(const AntennaLayout& layout, std::span<const UserStats> users,
                                      const SystemConfig& cfg, int n);

double b_m(const Vec2& t, const MrtSurrogateTerms& terms, int m);
Vec2 grad_b(const Vec2& t, const MrtSurrogateTerms& terms, int m);
Eigen::Matrix2d hessian_b(const Vec2& t, const MrtSurrogateTerms& terms, int m);

// Entries of the position-independent majorant of |Hessian| entries.
Eigen::Matrix2d psi_matrix(const MrtSurrogateTerms& terms, int m);

// Largest eigenvalue of psi_matrix times 8 pi^2 / lambda^2.
double psi_bound(const MrtSurrogateTerms& terms, int m);

// Frobenius-norm variant (looser).
double psi_frobenius_bound(const MrtSurrogateTerms& terms, int m);

// log2(1 + c2_m / (b_m(t) + c3_m)) with antenna n moved to t.
double mrt_rate_at(const Vec2& t, const MrtSurrogateTerms& terms, int m);
double mrt_objective_at(const Vec2& t, const MrtSurrogateTerms& terms);

// Concave quadratic minorizer of mrt_objective_at around the expansion point.
double mrt_surrogate_value(const Vec2& t, const MrtSurrogateTerms& terms, Vec2* grad = nullptr);

struct MrtSubproblem {
    MrtSurrogateTerms terms;
    Subproblem2D problem;
};

MrtSubproblem build_mrt_subproblem(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg,
                        int n, double curvature_scale = 1.0);

struct MrtOptimizationResult {
    AntennaLayout layout;
    OptimizerTrace trace;
};

// Sum of the closed-form MRT rate approximation.
double mrt_true_objective(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg);

MrtOptimizationResult optimize_mrt(const AntennaLayout& layout0, std::span<const UserStats> users,
                                   const SystemConfig& cfg, const AoOptions& options = {});

} // namespace mats
