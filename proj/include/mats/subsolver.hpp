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

#include <functional>
#include <vector>

namespace mats {

// normal^T x >= offset
struct HalfPlane {
    Vec2 normal;
    double offset = 0.0;

    double slack(const Vec2& x) const { return normal.dot(x) - offset; }
};

struct Box {
    double x_lo = -1.0;
    double x_hi = 1.0;
    double y_lo = -1.0;
    double y_hi = 1.0;

    static Box from_region(const Region& r) { return Box{-r.x_half, r.x_half, -r.y_half, r.y_half}; }
    bool contains(const Vec2& p, double tol = 0.0) const
    {
        return p.x() >= x_lo - tol && p.x() <= x_hi + tol && p.y() >= y_lo - tol && p.y() <= y_hi + tol;
    }
};

// Objective oracle: returns f(x) and, when grad != nullptr, writes the
// gradient. Values outside the objective's domain are reported as -inf.
using Objective2D = std::function<double(const Vec2& x, Vec2* grad)>;

// Maximize a concave objective of one 2-D position over box and half-planes.
struct Subproblem2D {
    Objective2D objective;
    std::vector<HalfPlane> halfplanes;
    Box box;
    Vec2 start = Vec2::Zero();

    bool is_feasible(const Vec2& x, double tol = 1e-12) const;
};

struct SubsolverOptions {
    double tol = 1e-8;     // projected-gradient norm
    int max_iters = 10000;
};

struct SubsolverResult {
    Vec2 point = Vec2::Zero();
    double value = 0.0;
    double start_value = 0.0;
    double stationarity = 0.0;  // ||x - P(x + grad f(x))||
    int iterations = 0;
    bool converged = false;
    // Some probe fell outside the objective's domain (value -inf or NaN).
    bool left_domain = false;
};

// For each other antenna i, the first-order lower bound of ||t - t_i||^2
// around the current position t_n must stay >= d_min^2.
std::vector<HalfPlane> linearize_distance_constraints(const AntennaLayout& layout, int n, double d_min);

// Euclidean projection of y onto {box} intersected with the half-planes,
// found by enumerating 0, 1 and 2 active constraints. Returns false if the
// feasible set is empty.
bool project_onto_polygon(const Vec2& y, const Box& box, const std::vector<HalfPlane>& halfplanes, Vec2& out);

// Projected gradient ascent with Armijo backtracking (halving, initial
// step 1). Every iterate is feasible and the objective never decreases
// beyond the rounding of its evaluation. converged means the projected
// gradient norm reached tol; otherwise the last iterate is returned.
// Throws DomainError for an infeasible start.
SubsolverResult maximize(const Subproblem2D& sub, const SubsolverOptions& options = {});

// Midpoint concavity spot check along random segments inside the box.
bool spot_check_concavity(const Subproblem2D& sub, Rng& rng, int segments = 100, double tol = 1e-9);

} // namespace mats
