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


#include "support.hpp"

#include "mats/error.hpp"
#include "mats/experiments.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace mats;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path d = fs::temp_directory_path() / ("mats_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string read_file(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& s)
{
    std::ofstream(p) << s;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(MATS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmallConfig = R"({
  "id": "small",
  "seed": 3,
  "system": { "n_antennas": 4, "p_tot": 1, "region_a": 2, "beta0_db": -40, "alpha": 2.8 },
  "user_gen": { "n_users": 2, "distance_range": [50, 70], "kappa": 6, "noise_power_dbm": -80 },
  "sweep": { "variable": "p_tot", "values": [0.5, 1.0] },
  "schemes": ["ma_zf", "fpa_zf", "ma_mrt", "fpa_mrt", "fpa_wmmse"],
  "mc_samples": 400
})";

} // namespace

TEST_CASE("dB and dBm keys are converted")
{
    CHECK(db_to_linear(-40.0) == Approx(1e-4).epsilon(1e-14));
    CHECK(dbm_to_watts(-80.0) == Approx(1e-11).epsilon(1e-14));
    CHECK(dbm_to_watts(30.0) == Approx(1.0).epsilon(1e-14));

    const Scenario sc = load_scenario(R"({
      "system": { "beta0_db": -30, "alpha": 2 },
      "users": [ {"theta": 0.1, "phi": 0.2, "kappa": 3, "distance": 10, "noise_power_dbm": -70},
                 {"theta": -0.4, "phi": 0.5, "kappa": 3, "beta": 2e-6} ]
    })");
    REQUIRE(sc.users.size() == 2);
    CHECK(sc.cfg.beta0 == Approx(1e-3).epsilon(1e-14));
    CHECK(sc.users[0].beta == Approx(1e-3 / 100.0).epsilon(1e-12));
    CHECK(sc.users[0].noise_power == Approx(1e-10).epsilon(1e-14));
    CHECK(sc.users[1].beta == 2e-6);
    CHECK(sc.cfg.n_users == 2);
    CHECK_FALSE(sc.user_gen);
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(load_scenario(R"({"system": {"beta0": 1e-4, "beta0_db": -40}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"systm": {}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"system": {"n_antenas": 6}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"users": [{"theta": 0, "phi": 0, "beta": 1}], "user_gen": {}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"users": [{"theta": 0, "phi": 0}]})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"users": []})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"sweep": {"variable": "p_tot", "values": [1, 0.5]}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"sweep": {"variable": "p_tot", "values": [1, 1]}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"sweep": {"variable": "bandwidth", "values": [1]}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"schemes": ["ma_zf", "ma_magic"]})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"mc_samples": 10})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"id": "a,b"})"), ConfigError);
    CHECK_THROWS_AS(load_scenario(R"({"system": {"n_antennas": "six"}})"), ConfigError);
    CHECK_THROWS_AS(load_scenario("{not json"), ConfigError);
    CHECK_THROWS_AS(load_scenario_file("/nonexistent/mats.json"), ConfigError);
}

TEST_CASE("scheme and sweep names round-trip")
{
    for (Scheme s : {Scheme::ma_zf, Scheme::ma_mrt, Scheme::fpa_zf, Scheme::fpa_mrt, Scheme::fpa_mrt_opt,
                     Scheme::fpa_zf_wf, Scheme::fpa_wmmse}) {
        CHECK(scheme_from_string(to_string(s)) == s);
    }
    for (SweepVar v : {SweepVar::p_tot, SweepVar::kappa, SweepVar::region_a, SweepVar::n_users}) {
        CHECK(sweep_var_from_string(to_string(v)) == v);
    }
}

TEST_CASE("generated users are deterministic and uniform in distance")
{
    Scenario sk = default_scenario(9);
    CHECK(sk.cfg.n_antennas == 6);
    CHECK(sk.users.size() == 5);
    CHECK(sk.cfg.region.x_half == Approx(2.0));
    CHECK(sk.cfg.region.y_half == Approx(3.0));
    const Scenario again = generate_scenario(sk);
    for (std::size_t i = 0; i < sk.users.size(); ++i) {
        CHECK(again.users[i].theta == sk.users[i].theta);
        CHECK(again.users[i].beta == sk.users[i].beta);
    }

    sk.user_gen->n_users = 10000;
    sk.cfg.n_users = 10000;
    const Scenario many = generate_scenario(sk);
    mats::testing::RunningStats d;
    for (const auto& u : many.users) {
        d.add(u.distance);
        CHECK(u.distance >= 50.0);
        CHECK(u.distance <= 70.0);
        CHECK(std::abs(u.theta) <= std::numbers::pi / 2);
        CHECK(std::abs(u.phi) <= std::numbers::pi / 2);
    }
    CHECK(std::abs(d.mean - 60.0) <= 3.0 * d.std_err());
}

TEST_CASE("sweep points")
{
    Scenario sc = default_scenario(2);
    sc.sweep = Sweep{SweepVar::kappa, {1.0, 10.0}};
    const Scenario k = at_sweep_point(sc, 10.0);
    for (const auto& u : k.users) {
        CHECK(u.kappa == 10.0);
    }
    sc.sweep = Sweep{SweepVar::region_a, {1.0, 3.0}};
    const Scenario a = at_sweep_point(sc, 3.0);
    CHECK(a.cfg.region.x_half * a.cfg.region.y_half * 4 == Approx(3.0 * 3.0 * 6));
    sc.sweep = Sweep{SweepVar::n_users, {2.0, 3.0}};
    const Scenario m2 = at_sweep_point(sc, 2.0);
    const Scenario m3 = at_sweep_point(sc, 3.0);
    CHECK(m2.users.size() == 2);
    CHECK(m3.users.size() == 3);
    CHECK(m3.users[1].theta == m2.users[1].theta);
    CHECK_THROWS_AS(at_sweep_point(sc, 2.5), ConfigError);
    sc.sweep.reset();
    CHECK_THROWS_AS(at_sweep_point(sc, 1.0), ConfigError);
}

TEST_CASE("CSV round trip")
{
    std::vector<ResultRow> rows(3);
    rows[0] = {"s", "ma_zf", "p_tot", 0.5, 12.25, 0.0125, 7, 3.5, {1.0, 2.0, 3.0}};
    rows[1] = {"s", "ma_zf_lb", "p_tot", 0.5, 11.0, std::nullopt, 7, 3.5, {1.0, 2.0, 3.0}};
    rows[2] = {"s", "fpa_zf", "none", std::nullopt, 1.0 / 3.0, 1e-17, 0, 0.0, {0.1}};
    const std::string text = to_csv(rows);
    CHECK(text.substr(0, text.find('\n')) ==
          "scenario,scheme,sweep_var,sweep_value,sum_rate,stderr,iters,wall_ms,rate_user_1,rate_user_2,rate_user_3");
    const auto back = parse_csv(text);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].scenario == rows[i].scenario);
        CHECK(back[i].scheme == rows[i].scheme);
        CHECK(back[i].sweep_var == rows[i].sweep_var);
        CHECK(back[i].sweep_value == rows[i].sweep_value);
        CHECK(back[i].sum_rate == rows[i].sum_rate);
        CHECK(back[i].std_err == rows[i].std_err);
        CHECK(back[i].iters == rows[i].iters);
        CHECK(back[i].wall_ms == rows[i].wall_ms);
        CHECK(back[i].per_user == rows[i].per_user);
    }
    CHECK(csv_header(0) == "scenario,scheme,sweep_var,sweep_value,sum_rate,stderr,iters,wall_ms");
}

TEST_CASE("CSV parse errors")
{
    CHECK_THROWS_AS(parse_csv(""), ConfigError);
    CHECK_THROWS_AS(parse_csv("a,b,c\n"), ConfigError);
    const std::string h = csv_header(1) + "\n";
    CHECK_THROWS_AS(parse_csv(h + "s,x,none,,1.0,,0,0\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv(h + "s,x,none,,abc,,0,0,1\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv(h + "s,x,none,,1.0x,,0,0,1\n"), ConfigError);
    CHECK_THROWS_AS(parse_csv(csv_header(0) + ",rate_user_2\n"), ConfigError);
    CHECK(parse_csv(h).empty());
}

TEST_CASE("atomic write")
{
    const fs::path d = scratch_dir("atomic");
    const fs::path p = d / "sub" / "x.csv";
    write_file_atomic(p, "one\n");
    write_file_atomic(p, "two\n");
    CHECK(read_file(p) == "two\n");
    CHECK_FALSE(fs::exists(d / "sub" / "x.csv.tmp"));
    write_text(d / "blocker", "");
    CHECK_THROWS_AS(write_file_atomic(d / "blocker" / "y.csv", "z"), Error);
    fs::remove_all(d);
}

TEST_CASE("run_scenario rows")
{
    const Scenario sc = load_scenario(kSmallConfig);
    const auto rows = run_scenario(sc);
    REQUIRE(rows.size() == 2 * 9);
    std::size_t lb = 0;
    for (const auto& r : rows) {
        CHECK(r.scenario == "small");
        CHECK(r.sweep_var == "p_tot");
        CHECK(r.per_user.size() == 2);
        const bool closed = r.scheme.ends_with("_lb") || r.scheme.ends_with("_approx");
        CHECK(r.std_err.has_value() == !closed);
        CHECK(r.iters == (r.scheme.starts_with("ma_") ? r.iters : 0));
        double s = 0.0;
        for (double v : r.per_user) {
            s += v;
        }
        CHECK(r.sum_rate == Approx(s).epsilon(1e-12));
        lb += r.scheme.ends_with("_lb") ? 1 : 0;
    }
    CHECK(lb == 4);

    // fpa_zf Monte-Carlo sits at or above its Jensen bound.
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i].scheme == "fpa_zf") {
            REQUIRE(rows[i + 1].scheme == "fpa_zf_lb");
            CHECK(rows[i + 1].sum_rate <= rows[i].sum_rate + 3.0 * *rows[i].std_err);
        }
    }

    auto again = run_scenario(sc, RunOptions{3});
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        again[i].wall_ms = rows[i].wall_ms;
        CHECK(format_row(again[i], 2) == format_row(rows[i], 2));
    }
}

TEST_CASE("convergence CSV")
{
    Scenario sc = load_scenario(kSmallConfig);
    sc.schemes = {Scheme::fpa_zf};
    const auto traces = converge(sc);
    REQUIRE(traces.size() == 2);
    const std::string csv = convergence_csv("small", traces);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "scenario,scheme,step,sweep,antenna,surrogate,objective,accepted");
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
    }
    CHECK(n == traces[0].trace.iterations.size() + traces[1].trace.iterations.size() + 2);
}

TEST_CASE("CLI exit codes")
{
    const fs::path d = scratch_dir("cli");
    const std::string out = " --out " + d.string();
    CHECK(run_cli("validate --samples 200" + out) == 0);
    CHECK(fs::exists(d / "default_validate.json"));
    CHECK(run_cli("validate --samples 200 --psi-scale 0.5" + out) == 1);
    CHECK(run_cli("validate --samples 200 --xi-scale 0.5" + out) == 1);
    CHECK(run_cli("sweep" + out) == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("sweep --config /nonexistent.json" + out) == 2);

    write_text(d / "bad.json", R"({"system": {"n_antennas": 6, "colour": 1}})");
    CHECK(run_cli("sweep --config " + (d / "bad.json").string() + out) == 2);

    write_text(d / "one.json", R"({"id": "one", "system": {"n_antennas": 4},
      "users": [{"theta": 0.3, "phi": -0.2, "kappa": 6, "distance": 60}], "mc_samples": 1000})");
    CHECK(run_cli("validate --samples 200 --config " + (d / "one.json").string() + out) == 0);
    const std::string report = read_file(d / "one_validate.json");
    CHECK(report.find("position_invariance") != std::string::npos);

    write_text(d / "tiny.json", kSmallConfig);
    CHECK(run_cli("sweep --config " + (d / "tiny.json").string() + out) == 0);
    const auto rows = parse_csv(read_file(d / "small.csv"));
    CHECK(rows.size() == 18);
    CHECK(run_cli("converge --config " + (d / "tiny.json").string() + out) == 0);
    CHECK(fs::exists(d / "small_converge.csv"));
    CHECK(run_cli("optimize --config " + (d / "tiny.json").string() + out) == 0);
    CHECK(fs::exists(d / "small_optimize.json"));

    write_text(d / "blocker", "");
    CHECK(run_cli("sweep --config " + (d / "tiny.json").string() + " --out " + (d / "blocker").string()) == 2);
    fs::remove_all(d);
}
