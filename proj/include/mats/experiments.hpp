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

// Experiment runner and CSV persistence.
//
// Result CSV columns:
//
//   scenario,scheme,sweep_var,sweep_value,sum_rate,stderr,iters,wall_ms,
//   rate_user_1,...,rate_user_K
//
// One Monte-Carlo row per (sweep point, scheme), named after the scheme,
// carrying its standard error. The ZF and MRT schemes add a closed-form row
// named "<scheme>_lb" (ZF lower bound) or "<scheme>_approx" (MRT
// approximation) with an empty stderr. K is the largest user count in the
// file; shorter rows leave trailing rate cells empty. Without a sweep,
// sweep_var is "none" and sweep_value is empty. iters counts AO sweeps
// (0 for fixed layouts).

#include "mats/mrt_optimizer.hpp"
#include "mats/scenario.hpp"
#include "mats/zf_optimizer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mats {

struct ResultRow {
    std::string scenario;
    std::string scheme;
    std::string sweep_var = "none";
    std::optional<double> sweep_value;
    double sum_rate = 0.0;
    std::optional<double> std_err;
    int iters = 0;
    double wall_ms = 0.0;
    std::vector<double> per_user;
};

struct RunOptions {
    int threads = 1;
};

// Layout used by a scheme: FPA grid, or the AO optimum started from it.
struct SchemeLayout {
    AntennaLayout layout;
    OptimizerTrace trace;  // empty for FPA schemes
};

SchemeLayout scheme_layout(const Scenario& scenario, Scheme scheme);

// Rows for every sweep point and scheme. Monte-Carlo draws share one
// seed per sweep point across schemes.
std::vector<ResultRow> run_scenario(const Scenario& scenario, const RunOptions& options = {});

std::string csv_header(int n_user_columns);
std::string format_row(const ResultRow& row, int n_user_columns);
std::string to_csv(const std::vector<ResultRow>& rows);

// Writes through a temporary file in the same directory, then renames.
// Throws Error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Parses a CSV produced by to_csv. Throws ConfigError on schema mismatch.
std::vector<ResultRow> parse_csv(const std::string& text);

struct ConvergenceTrace {
    Scheme scheme;
    OptimizerTrace trace;
};

std::vector<ConvergenceTrace> converge(const Scenario& scenario);
std::string convergence_csv(const std::string& scenario_id, const std::vector<ConvergenceTrace>& traces);

// Validation

struct CheckResult {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    bool all_passed() const;
    std::string to_json() const;
};

struct ValidateOptions {
    int samples = 1000;              // random points per pointwise check
    long long moment_samples = 100000;
    double psi_scale = 1.0;          // < 1 corrupts the MRT curvature bound
    double xi_scale = 1.0;           // < 1 corrupts the ZF curvature bound
    int threads = 1;
};

ValidationReport validate(const Scenario& scenario, const ValidateOptions& options = {});

} // namespace mats
