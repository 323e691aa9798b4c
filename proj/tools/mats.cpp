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

// mats command-line driver.
//
//   mats optimize --config cfg.json [--seed S] [--out DIR]
//   mats sweep    --config cfg.json [--seed S] [--out DIR] [--threads N]
//   mats converge --config cfg.json [--seed S] [--out DIR]
//   mats validate [--config cfg.json] [--seed S] [--out DIR] [--threads N]
//
// Exit status: 0 on success (for validate: all checks passed), 1 when a
// validation check fails, 2 on usage, configuration, or runtime errors.

#include "mats/error.hpp"
#include "mats/experiments.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

struct CommonArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    int threads = 1;
};

mats::Scenario load(const CommonArgs& a)
{
    mats::Scenario sc = a.config.empty() ? mats::default_scenario() : mats::load_scenario_file(a.config);
    if (a.seed) {
        sc.seed = *a.seed;
        sc = mats::generate_scenario(sc);
    }
    sc.validate();
    return sc;
}

std::filesystem::path out_dir(const CommonArgs& a, const mats::Scenario& sc)
{
    return a.out.empty() ? std::filesystem::path(sc.output) : std::filesystem::path(a.out);
}

nlohmann::json layout_json(const mats::AntennaLayout& layout)
{
    auto arr = nlohmann::json::array();
    for (const auto& p : layout.positions) {
        arr.push_back({p.x(), p.y()});
    }
    return arr;
}

int cmd_optimize(const CommonArgs& a)
{
    const mats::Scenario sc = load(a);
    nlohmann::json doc;
    doc["scenario"] = sc.id;
    doc["seed"] = sc.seed;
    doc["fpa_layout"] = layout_json(mats::fpa_grid_layout(sc.cfg));
    doc["results"] = nlohmann::json::array();
    for (const auto& t : mats::converge(sc)) {
        const auto sl = t.trace.iterations.empty() ? mats::AntennaLayout{} : t.trace.iterations.back().layout;
        doc["results"].push_back({{"scheme", std::string(mats::to_string(t.scheme))},
                                  {"initial_objective", t.trace.initial_objective},
                                  {"final_objective", t.trace.final_objective()},
                                  {"sweeps", t.trace.sweeps},
                                  {"converged", t.trace.converged},
                                  {"sweep_objective", t.trace.sweep_objective},
                                  {"layout", layout_json(sl)}});
    }
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    mats::write_file_atomic(out_dir(a, sc) / (sc.id + "_optimize.json"), text);
    return 0;
}

int cmd_sweep(const CommonArgs& a)
{
    const mats::Scenario sc = load(a);
    mats::RunOptions opt;
    opt.threads = a.threads;
    const auto rows = mats::run_scenario(sc, opt);
    const auto path = out_dir(a, sc) / (sc.id + ".csv");
    try {
        mats::write_file_atomic(path, mats::to_csv(rows));
    } catch (const mats::Error& e) {
        std::cerr << "mats: " << e.what() << " (" << rows.size() << " rows computed, none persisted)\n";
        return 2;
    }
    std::cout << "wrote " << rows.size() << " rows to " << path.string() << "\n";
    return 0;
}

int cmd_converge(const CommonArgs& a)
{
    const mats::Scenario sc = load(a);
    const auto traces = mats::converge(sc);
    const auto path = out_dir(a, sc) / (sc.id + "_converge.csv");
    mats::write_file_atomic(path, mats::convergence_csv(sc.id, traces));
    for (const auto& t : traces) {
        std::printf("%s: %.6f -> %.6f in %d sweeps%s\n", std::string(mats::to_string(t.scheme)).c_str(),
                    t.trace.initial_objective, t.trace.final_objective(), t.trace.sweeps,
                    t.trace.converged ? "" : " (sweep cap reached)");
    }
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_validate(const CommonArgs& a, const mats::ValidateOptions& vopt_in)
{
    const mats::Scenario sc = load(a);
    mats::ValidateOptions vopt = vopt_in;
    vopt.threads = a.threads;
    const auto report = mats::validate(sc, vopt);
    for (const auto& c : report.checks) {
        std::printf("[%s] %-28s residual %-12.4g tol %-10.3g %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.residual, c.tolerance, c.detail.c_str());
    }
    mats::write_file_atomic(out_dir(a, sc) / (sc.id + "_validate.json"), report.to_json());
    return report.all_passed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-timescale movable-antenna MU-MIMO simulator"};
    app.require_subcommand(1);
    CommonArgs args;
    mats::ValidateOptions vopt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config, "JSON scenario file")->check(CLI::ExistingFile);
        sub->add_option("--seed", args.seed, "Override the scenario seed");
        sub->add_option("--out", args.out, "Output directory (default: config 'output')");
        sub->add_option("--threads", args.threads, "Monte-Carlo worker threads")->check(CLI::PositiveNumber);
    };
    auto* optimize = app.add_subcommand("optimize", "Optimize antenna positions and print the layouts");
    auto* sweep = app.add_subcommand("sweep", "Run the scenario sweep and write the result CSV");
    auto* converge = app.add_subcommand("converge", "Write per-iteration optimizer traces");
    auto* validate = app.add_subcommand("validate", "Run the oracle checks");
    for (auto* sub : {optimize, sweep, converge, validate}) {
        add_common(sub);
    }
    for (auto* sub : {optimize, sweep, converge}) {
        sub->get_option("--config")->required();
    }
    validate->add_option("--samples", vopt.samples, "Random points per pointwise check");
    validate->add_option("--psi-scale", vopt.psi_scale, "Scale the MRT curvature bound (negative testing)");
    validate->add_option("--xi-scale", vopt.xi_scale, "Scale the ZF curvature bound (negative testing)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*optimize) {
            return cmd_optimize(args);
        }
        if (*sweep) {
            return cmd_sweep(args);
        }
        if (*converge) {
            return cmd_converge(args);
        }
        return cmd_validate(args, vopt);
    } catch (const std::exception& e) {
        std::cerr << "mats: " << e.what() << "\n";
        return 2;
    }
}
