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

#include "mats/experiments.hpp"
#include "mats/ergodic.hpp"
#include "mats/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

namespace mats {

namespace {

std::string fmt(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool is_ma(Scheme s)
{
    return s == Scheme::ma_zf || s == Scheme::ma_mrt;
}

Beamformer beamformer_for(Scheme s)
{
    switch (s) {
    case Scheme::ma_zf:
    case Scheme::fpa_zf:
        return Beamformer::zf;
    case Scheme::ma_mrt:
    case Scheme::fpa_mrt:
        return Beamformer::mrt;
    case Scheme::fpa_mrt_opt:
        return Beamformer::mrt_power_opt;
    case Scheme::fpa_zf_wf:
        return Beamformer::zf_waterfilling;
    case Scheme::fpa_wmmse:
        return Beamformer::wmmse;
    }
    throw DomainError("unknown scheme");
}

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw ConfigError("csv: trailing characters in " + what + " '" + s + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("csv: cannot parse " + what + " '" + s + "'");
    }
}

} // namespace

SchemeLayout scheme_layout(const Scenario& scenario, Scheme scheme)
{
    SchemeLayout out;
    out.layout = fpa_grid_layout(scenario.cfg);
    if (scheme == Scheme::ma_zf) {
        auto r = optimize_zf(out.layout, scenario.users, scenario.cfg, scenario.optimizer);
        out.layout = std::move(r.layout);
        out.trace = std::move(r.trace);
    } else if (scheme == Scheme::ma_mrt) {
        auto r = optimize_mrt(out.layout, scenario.users, scenario.cfg, scenario.optimizer);
        out.layout = std::move(r.layout);
        out.trace = std::move(r.trace);
    }
    return out;
}

std::vector<ResultRow> run_scenario(const Scenario& scenario, const RunOptions& options)
{
    scenario.validate();
    std::vector<Scenario> points;
    if (scenario.sweep) {
        for (double v : scenario.sweep->values) {
            points.push_back(at_sweep_point(scenario, v));
        }
    } else {
        points.push_back(scenario);
    }

    std::vector<ResultRow> rows;
    for (std::size_t p = 0; p < points.size(); ++p) {
        const Scenario& sc = points[p];
        McOptions mc;
        mc.n_samples = sc.mc_samples;
        mc.seed = scenario.seed * 1000003ULL + p + 1;
        mc.threads = options.threads;
        for (Scheme scheme : sc.schemes) {
            const auto t0 = std::chrono::steady_clock::now();
            SchemeLayout sl = scheme_layout(sc, scheme);
            const ErgodicReport rep = mc_ergodic_rate(sl.layout, sc.users, sc.cfg, beamformer_for(scheme), mc);
            const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

            ResultRow row;
            row.scenario = scenario.id;
            row.scheme = std::string(to_string(scheme));
            if (scenario.sweep) {
                row.sweep_var = std::string(to_string(scenario.sweep->variable));
                row.sweep_value = scenario.sweep->values[p];
            }
            row.sum_rate = rep.sum;
            row.std_err = rep.sum_std_err;
            row.iters = is_ma(scheme) ? sl.trace.sweeps : 0;
            row.wall_ms = wall;
            row.per_user = to_std(rep.per_user);
            rows.push_back(row);

            std::optional<ErgodicReport> closed;
            std::string suffix;
            if (scheme == Scheme::ma_zf || scheme == Scheme::fpa_zf) {
                closed = zf_ergodic_lower_bound(sl.layout, sc.users, sc.cfg);
                suffix = "_lb";
            } else if (scheme == Scheme::ma_mrt || scheme == Scheme::fpa_mrt) {
                closed = mrt_ergodic_approx(sl.layout, sc.users, sc.cfg);
                suffix = "_approx";
            }
            if (closed) {
                ResultRow cf = row;
                cf.scheme += suffix;
                cf.sum_rate = closed->sum;
                cf.std_err.reset();
                cf.per_user = to_std(closed->per_user);
                rows.push_back(cf);
            }
        }
    }
    return rows;
}

std::string csv_header(int n_user_columns)
{
    std::string h = "scenario,scheme,sweep_var,sweep_value,sum_rate,stderr,iters,wall_ms";
    for (int k = 1; k <= n_user_columns; ++k) {
        h += ",rate_user_" + std::to_string(k);
    }
    return h;
}

std::string format_row(const ResultRow& row, int n_user_columns)
{
    std::string s = row.scenario + "," + row.scheme + "," + row.sweep_var + ",";
    s += row.sweep_value ? fmt(*row.sweep_value) : "";
    s += "," + fmt(row.sum_rate) + ",";
    s += row.std_err ? fmt(*row.std_err) : "";
    s += "," + std::to_string(row.iters) + "," + fmt(row.wall_ms);
    for (int k = 0; k < n_user_columns; ++k) {
        s += ",";
        if (k < static_cast<int>(row.per_user.size())) {
            s += fmt(row.per_user[static_cast<std::size_t>(k)]);
        }
    }
    return s;
}

std::string to_csv(const std::vector<ResultRow>& rows)
{
    int k = 0;
    for (const auto& r : rows) {
        k = std::max(k, static_cast<int>(r.per_user.size()));
    }
    std::string out = csv_header(k) + "\n";
    for (const auto& r : rows) {
        out += format_row(r, k) + "\n";
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) {
            throw Error("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
        }
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open '" + tmp.string() + "' for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw Error("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot rename into '" + path.string() + "'");
    }
}

std::vector<ResultRow> parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("csv: empty input");
    }
    const auto header = split(line, ',');
    const std::vector<std::string> fixed{"scenario", "scheme", "sweep_var", "sweep_value",
                                         "sum_rate", "stderr",  "iters",     "wall_ms"};
    if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
        throw ConfigError("csv: header does not match the result schema");
    }
    const int k = static_cast<int>(header.size() - fixed.size());
    for (int i = 0; i < k; ++i) {
        if (header[fixed.size() + static_cast<std::size_t>(i)] != "rate_user_" + std::to_string(i + 1)) {
            throw ConfigError("csv: unexpected per-user column '" + header[fixed.size() + i] + "'");
        }
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto c = split(line, ',');
        if (c.size() != header.size()) {
            throw ConfigError("csv: row has " + std::to_string(c.size()) + " cells, expected " +
                              std::to_string(header.size()));
        }
        ResultRow r;
        r.scenario = c[0];
        r.scheme = c[1];
        r.sweep_var = c[2];
        if (!c[3].empty()) {
            r.sweep_value = parse_double(c[3], "sweep_value");
        }
        r.sum_rate = parse_double(c[4], "sum_rate");
        if (!c[5].empty()) {
            r.std_err = parse_double(c[5], "stderr");
        }
        r.iters = static_cast<int>(parse_double(c[6], "iters"));
        r.wall_ms = parse_double(c[7], "wall_ms");
        for (int i = 0; i < k; ++i) {
            const auto& cell = c[fixed.size() + static_cast<std::size_t>(i)];
            if (!cell.empty()) {
                r.per_user.push_back(parse_double(cell, "rate_user"));
            }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ConvergenceTrace> converge(const Scenario& scenario)
{
    scenario.validate();
    std::vector<ConvergenceTrace> out;
    for (Scheme s : scenario.schemes) {
        if (is_ma(s)) {
            out.push_back({s, scheme_layout(scenario, s).trace});
        }
    }
    if (out.empty()) {
        for (Scheme s : {Scheme::ma_zf, Scheme::ma_mrt}) {
            out.push_back({s, scheme_layout(scenario, s).trace});
        }
    }
    return out;
}

std::string convergence_csv(const std::string& scenario_id, const std::vector<ConvergenceTrace>& traces)
{
    std::string out = "scenario,scheme,step,sweep,antenna,surrogate,objective,accepted\n";
    for (const auto& t : traces) {
        const std::string prefix = scenario_id + "," + std::string(to_string(t.scheme)) + ",";
        out += prefix + "0,0,,," + fmt(t.trace.initial_objective) + ",\n";
        int step = 1;
        for (const auto& e : t.trace.iterations) {
            out += prefix + std::to_string(step++) + "," + std::to_string(e.sweep) + "," + std::to_string(e.antenna) +
                   "," + fmt(e.surrogate) + "," + fmt(e.objective) + "," + (e.accepted ? "1" : "0") + "\n";
        }
    }
    return out;
}

bool ValidationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string ValidationReport::to_json() const
{
    nlohmann::json j;
    j["all_passed"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"residual", c.residual},
                               {"tolerance", c.tolerance},
                               {"detail", c.detail}});
    }
    return j.dump(2) + "\n";
}

} // namespace mats
