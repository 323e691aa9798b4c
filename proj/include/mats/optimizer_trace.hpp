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
#include "mats/subsolver.hpp"

#include <vector>

namespace mats {

struct TraceEntry {
    int sweep = 0;
    int antenna = 0;
    double surrogate = 0.0;  // surrogate value at the subproblem solution
    double objective = 0.0;  // true objective after the accept/reject decision
    bool accepted = false;
    AntennaLayout layout;
};

struct OptimizerTrace {
    double initial_objective = 0.0;
    std::vector<TraceEntry> iterations;
    std::vector<double> sweep_objective;  // true objective after each full sweep
    int sweeps = 0;
    bool converged = false;
    double threshold = 0.0;

    double final_objective() const
    {
        return sweep_objective.empty() ? initial_objective : sweep_objective.back();
    }
};

struct AoOptions {
    double zeta = 0.5e-4;  // stop when a sweep raises the objective by less than this fraction
    int max_sweeps = 200;
    SubsolverOptions subsolver;
    // Multiplies the curvature bound (psi or xi). Values < 1 break the
    // minorization and exist only for negative tests.
    double curvature_scale = 1.0;
    bool keep_layouts = true;
};

} // namespace mats
