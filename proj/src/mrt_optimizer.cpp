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

#include "mats/mrt_optimizer.hpp"
#include "mats/ergodic.hpp"
#include "mats/error.hpp"

#include <cmath>
#include <numbers>

namespace mats {

namespace {

double phase_arg(const Vec2& t, const MrtSurrogateTerms& terms, int m, int j)
{
    return terms.wave_number * (t.x() * terms.ax(m, j) + t.y() * terms.ay(m, j)) - std::arg(terms.tau(m, j));
}

double largest_eigenvalue_2x2(double a11, double a12, double a22)
{
    return 0.5 * (a11 + a22 + std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
}

} // namespace

cdouble tau(const AntennaLayout& layout, std::span<const UserStats> users, int n, int m, int j, double wavelength)
{
    const double k = 2.0 * std::numbers::pi / wavelength;
    const Vec2 a = direction_vector(users[static_cast<std::size_t>(m)]) -
                   direction_vector(users[static_cast<std::size_t>(j)]);
    cdouble sum = 0.0;
    for (int i = 0; i < layout.size(); ++i) {
        if (i != n) {
            sum += std::polar(1.0, k * layout.positions[static_cast<std::size_t>(i)].dot(a));
        }
    }
    return sum;
}

MrtSurrogateTerms mrt_surrogate_terms(const AntennaLayout& layout, std::span<const UserStats> users,
                                      const SystemConfig& cfg, int n)
{
    if (!(cfg.p_tot > 0.0)) {
        throw DomainError("mrt_surrogate_terms: p_tot must be positive");
    }
    if (n < 0 || n >= layout.size()) {
        throw DomainError("mrt_surrogate_terms: antenna index out of range");
    }
    const int m_users = static_cast<int>(users.size());
    const double big_n = layout.size();
    MrtSurrogateTerms t;
    t.antenna = n;
    t.wave_number = 2.0 * std::numbers::pi / cfg.wavelength;
    t.expansion_point = layout.positions[static_cast<std::size_t>(n)];
    t.ax = Eigen::MatrixXd::Zero(m_users, m_users);
    t.ay = Eigen::MatrixXd::Zero(m_users, m_users);
    t.tau = Eigen::MatrixXcd::Zero(m_users, m_users);
    t.c1 = Eigen::MatrixXd::Zero(m_users, m_users);
    t.c2.resize(m_users);
    t.c3.resize(m_users);

    double beta_sum = 0.0;
    for (const auto& u : users) {
        beta_sum += u.beta;
    }
    for (int m = 0; m < m_users; ++m) {
        const auto& um = users[static_cast<std::size_t>(m)];
        const double km = um.kappa;
        t.c2(m) = um.beta * ((2.0 * big_n * km + big_n) / ((km + 1.0) * (km + 1.0)) + big_n * big_n);
        double c3 = um.noise_power * big_n / (um.beta * cfg.p_tot) * beta_sum;
        for (int j = 0; j < m_users; ++j) {
            if (j == m) {
                continue;
            }
            const auto& uj = users[static_cast<std::size_t>(j)];
            const double kj = uj.kappa;
            const Vec2 a = direction_vector(um) - direction_vector(uj);
            t.ax(m, j) = a.x();
            t.ay(m, j) = a.y();
            t.tau(m, j) = tau(layout, users, n, m, j, cfg.wavelength);
            t.c1(m, j) = uj.beta * km * kj / ((km + 1.0) * (kj + 1.0));
            c3 += t.c1(m, j) * (std::norm(t.tau(m, j)) + 1.0);
            c3 += big_n * uj.beta * (km + kj + 1.0) / ((km + 1.0) * (kj + 1.0));
        }
        t.c3(m) = c3;
    }

    t.b_ref.resize(m_users);
    t.grad_ref.resize(static_cast<std::size_t>(m_users));
    t.psi.resize(m_users);
    for (int m = 0; m < m_users; ++m) {
        t.b_ref(m) = b_m(t.expansion_point, t, m);
        t.grad_ref[static_cast<std::size_t>(m)] = grad_b(t.expansion_point, t, m);
        t.psi(m) = psi_bound(t, m);
    }
    return t;
}

double b_m(const Vec2& t, const MrtSurrogateTerms& terms, int m)
{
    double b = 0.0;
    for (int j = 0; j < terms.n_users(); ++j) {
        if (j != m) {
            b += terms.c1(m, j) * std::abs(terms.tau(m, j)) * std::cos(phase_arg(t, terms, m, j));
        }
    }
    return 2.0 * b;
}

Vec2 grad_b(const Vec2& t, const MrtSurrogateTerms& terms, int m)
{
    Vec2 g = Vec2::Zero();
    for (int j = 0; j < terms.n_users(); ++j) {
        if (j != m) {
            const double w = terms.c1(m, j) * std::abs(terms.tau(m, j)) * std::sin(phase_arg(t, terms, m, j));
            g += w * Vec2(terms.ax(m, j), terms.ay(m, j));
        }
    }
    return -2.0 * terms.wave_number * g;
}

Eigen::Matrix2d hessian_b(const Vec2& t, const MrtSurrogateTerms& terms, int m)
{
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (int j = 0; j < terms.n_users(); ++j) {
        if (j != m) {
            const Vec2 a(terms.ax(m, j), terms.ay(m, j));
            const double w = terms.c1(m, j) * std::abs(terms.tau(m, j)) * std::cos(phase_arg(t, terms, m, j));
            h += w * a * a.transpose();
        }
    }
    return -2.0 * terms.wave_number * terms.wave_number * h;
}

Eigen::Matrix2d psi_matrix(const MrtSurrogateTerms& terms, int m)
{
    Eigen::Matrix2d psi = Eigen::Matrix2d::Zero();
    for (int j = 0; j < terms.n_users(); ++j) {
        if (j != m) {
            const double w = terms.c1(m, j) * std::abs(terms.tau(m, j));
            const double ax = terms.ax(m, j);
            const double ay = terms.ay(m, j);
            psi(0, 0) += w * ax * ax;
            psi(0, 1) += w * std::abs(ax * ay);
            psi(1, 1) += w * ay * ay;
        }
    }
    psi(1, 0) = psi(0, 1);
    return psi;
}

double psi_bound(const MrtSurrogateTerms& terms, int m)
{
    // 2 k^2 = 8 pi^2 / lambda^2; the square-root term uses +4 Psi12^2.
    const Eigen::Matrix2d p = psi_matrix(terms, m);
    return 2.0 * terms.wave_number * terms.wave_number * largest_eigenvalue_2x2(p(0, 0), p(0, 1), p(1, 1));
}

double psi_frobenius_bound(const MrtSurrogateTerms& terms, int m)
{
    return 2.0 * terms.wave_number * terms.wave_number * psi_matrix(terms, m).norm();
}

double mrt_rate_at(const Vec2& t, const MrtSurrogateTerms& terms, int m)
{
    return std::log2(1.0 + terms.c2(m) / (b_m(t, terms, m) + terms.c3(m)));
}

double mrt_objective_at(const Vec2& t, const MrtSurrogateTerms& terms)
{
    double sum = 0.0;
    for (int m = 0; m < terms.n_users(); ++m) {
        sum += mrt_rate_at(t, terms, m);
    }
    return sum;
}

double mrt_surrogate_value(const Vec2& t, const MrtSurrogateTerms& terms, Vec2* grad)
{
    const Vec2 d = t - terms.expansion_point;
    double value = 0.0;
    if (grad) {
        grad->setZero();
    }
    for (int m = 0; m < terms.n_users(); ++m) {
        const double base = terms.b_ref(m) + terms.c3(m);
        const double slope = terms.c2(m) * std::numbers::log2e / (base * (base + terms.c2(m)));
        const Vec2& gb = terms.grad_ref[static_cast<std::size_t>(m)];
        value += std::log2(1.0 + terms.c2(m) / base) - slope * (gb.dot(d) + 0.5 * terms.psi(m) * d.squaredNorm());
        if (grad) {
            *grad -= slope * (gb + terms.psi(m) * d);
        }
    }
    return value;
}

MrtSubproblem build_mrt_subproblem(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg,
                        int n, double curvature_scale)
{
    MrtSubproblem sp;
    sp.terms = mrt_surrogate_terms(layout, users, cfg, n);
    sp.terms.psi *= curvature_scale;
    sp.problem.halfplanes = linearize_distance_constraints(layout, n, cfg.d_min);
    sp.problem.box = Box::from_region(cfg.region);
    sp.problem.start = layout.positions[static_cast<std::size_t>(n)];
    sp.problem.objective = [terms = sp.terms](const Vec2& x, Vec2* grad) {
        return mrt_surrogate_value(x, terms, grad);
    };
    return sp;
}

double mrt_true_objective(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg)
{
    return mrt_ergodic_approx(layout, users, cfg).sum;
}

MrtOptimizationResult optimize_mrt(const AntennaLayout& layout0, std::span<const UserStats> users,
                                   const SystemConfig& cfg, const AoOptions& options)
{
    if (!layout0.is_feasible(cfg)) {
        throw DomainError("optimize_mrt: initial layout is infeasible");
    }
    MrtOptimizationResult result;
    result.layout = layout0;
    auto& trace = result.trace;
    trace.threshold = options.zeta;
    double objective = mrt_true_objective(result.layout, users, cfg);
    trace.initial_objective = objective;

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        const double sweep_start = objective;
        for (int n = 0; n < result.layout.size(); ++n) {
            const MrtSubproblem sp = build_mrt_subproblem(result.layout, users, cfg, n, options.curvature_scale);
            const SubsolverResult sol = maximize(sp.problem, options.subsolver);
            AntennaLayout candidate = result.layout;
            candidate.positions[static_cast<std::size_t>(n)] = sol.point;
            const double candidate_objective = mrt_true_objective(candidate, users, cfg);
            TraceEntry entry;
            entry.sweep = sweep;
            entry.antenna = n;
            entry.surrogate = sol.value;
            entry.accepted = candidate_objective >= objective && candidate.is_feasible(cfg);
            if (entry.accepted) {
                result.layout = std::move(candidate);
                objective = candidate_objective;
            }
            entry.objective = objective;
            if (options.keep_layouts) {
                entry.layout = result.layout;
            }
            trace.iterations.push_back(std::move(entry));
        }
        trace.sweep_objective.push_back(objective);
        trace.sweeps = sweep;
        const double gain = objective - sweep_start;
        const double fraction = sweep_start > 0.0 ? gain / sweep_start : (gain > 0.0 ? 1.0 : 0.0);
        if (fraction < options.zeta) {
            trace.converged = true;
            break;
        }
    }
    return result;
}

} // namespace mats
