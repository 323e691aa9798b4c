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

#include "mats/zf_optimizer.hpp"
#include "mats/ergodic.hpp"
#include "mats/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mats {

namespace {

constexpr double kMaxCondition = 1e12;

double largest_eigenvalue_2x2(double a11, double a12, double a22)
{
    return 0.5 * (a11 + a22 + std::sqrt((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
}

double quad(const CVector& g, const CMatrix& a)
{
    return g.dot(a * g).real();
}

double phase_arg(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m, int u)
{
    return cache.wave_number * t.dot(cache.directions[static_cast<std::size_t>(u)]) - std::arg(terms.q(m, u));
}

} // namespace

CVector gbar_at(const Vec2& t, const ZfPerAntennaCache& cache)
{
    const auto m_users = static_cast<Eigen::Index>(cache.directions.size());
    CVector g(m_users);
    for (Eigen::Index u = 0; u < m_users; ++u) {
        g(u) = std::polar(1.0, -cache.wave_number * t.dot(cache.directions[static_cast<std::size_t>(u)]));
    }
    return g;
}

ZfPerAntennaCache build_cache(const AntennaLayout& layout, std::span<const UserStats> users,
                              const SystemConfig& cfg, int n)
{
    const int big_n = layout.size();
    const auto m_users = static_cast<Eigen::Index>(users.size());
    if (big_n <= m_users) {
        throw RankError("build_cache: requires N > M");
    }
    if (n < 0 || n >= big_n) {
        throw DomainError("build_cache: antenna index out of range");
    }
    ZfPerAntennaCache c;
    c.antenna = n;
    c.n_antennas = big_n;
    c.wave_number = 2.0 * std::numbers::pi / cfg.wavelength;
    c.expansion_point = layout.positions[static_cast<std::size_t>(n)];
    Eigen::VectorXd lambda1(m_users);
    c.lambda2.resize(m_users);
    c.eta.resize(m_users);
    const double p = cfg.p_tot / static_cast<double>(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const auto& u = users[static_cast<std::size_t>(m)];
        c.directions.push_back(direction_vector(u));
        lambda1(m) = 1.0 / (u.kappa + 1.0);
        c.lambda2(m) = std::sqrt(u.kappa / (u.kappa + 1.0));
        c.eta(m) = p / u.noise_power * u.beta * static_cast<double>(big_n - m_users);
    }

    c.theta1 = CMatrix::Zero(m_users, m_users);
    for (int i = 0; i < big_n; ++i) {
        if (i != n) {
            const CVector g = gbar_at(layout.positions[static_cast<std::size_t>(i)], c);
            c.theta1 += g * g.adjoint();
        }
    }
    c.gbar = gbar_at(c.expansion_point, c);

    const auto l2 = c.lambda2.asDiagonal();
    c.theta2 = l2 * c.theta1 * l2 / static_cast<double>(big_n);
    c.theta2.diagonal() += lambda1.cast<cdouble>();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(c.theta2);
    const double ev_min = eig.eigenvalues().minCoeff();
    const double ev_max = eig.eigenvalues().maxCoeff();
    const double cond = ev_min > 0.0 ? ev_max / ev_min : std::numeric_limits<double>::infinity();
    if (!(cond < kMaxCondition)) {
        throw NumericalRankError("build_cache: Theta2 is numerically singular", cond);
    }
    c.theta2_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();

    c.y = l2 * c.theta2_inv * l2;
    c.y.diagonal().array() += static_cast<double>(big_n) / static_cast<double>(m_users);
    c.l = l2 * c.theta2_inv;
    c.lam_max_x.resize(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        CMatrix x = c.theta2_inv(m, m).real() * c.y - c.l.col(m) * c.l.col(m).adjoint();
        x = 0.5 * (x + x.adjoint()).eval();
        c.lam_max_x(m) = Eigen::SelfAdjointEigenSolver<CMatrix>(x, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        c.x.push_back(std::move(x));
    }

    const CMatrix direct = sigma_inverse_direct(c, c.expansion_point);
    c.woodbury_residual = (sigma_inverse_woodbury(c, c.expansion_point) - direct).norm() / direct.norm();
    return c;
}

CMatrix sigma_inverse_direct(const ZfPerAntennaCache& cache, const Vec2& t)
{
    const CVector v = cache.lambda2.asDiagonal() * gbar_at(t, cache);
    CMatrix sigma = cache.theta2 + v * v.adjoint() / static_cast<double>(cache.n_antennas);
    Eigen::LLT<CMatrix> llt(sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericalRankError("sigma_inverse_direct: Sigma is not positive definite", 0.0);
    }
    return llt.solve(CMatrix::Identity(sigma.rows(), sigma.cols()));
}

CMatrix sigma_inverse_woodbury(const ZfPerAntennaCache& cache, const Vec2& t)
{
    const CVector v = cache.lambda2.asDiagonal() * gbar_at(t, cache);
    const CVector w = cache.theta2_inv * v;
    const double denom = cache.n_antennas + v.dot(w).real();
    return cache.theta2_inv - w * w.adjoint() / denom;
}

double sigma_inv_mm(const ZfPerAntennaCache& cache, int m, const CVector& g)
{
    const double den = quad(g, cache.y);
    if (!(den > 0.0)) {
        throw InvariantError("sigma_inv_mm: g^H Y g is not positive");
    }
    return quad(g, cache.x[static_cast<std::size_t>(m)]) / den;
}

double rate_lb1(const ZfPerAntennaCache& cache, int m, const Vec2& t)
{
    const double s = sigma_inv_mm(cache, m, gbar_at(t, cache));
    if (!(s > 0.0)) {
        throw InvariantError("rate_lb1: [Sigma^-1]_mm is not positive");
    }
    return std::log2(1.0 + cache.eta(m) / s);
}

double rate_lb1(const ZfPerAntennaCache& cache, int m)
{
    return rate_lb1(cache, m, cache.expansion_point);
}

double mm_minorizer(const ZfPerAntennaCache& cache, int m, const CVector& g_at, const CVector& g_ref)
{
    const CMatrix& x = cache.x[static_cast<std::size_t>(m)];
    const double lam = cache.lam_max_x(m);
    const double r = quad(g_ref, x);
    const double rho = quad(g_ref, cache.y) / r;
    const double big_m = static_cast<double>(g_ref.size());
    const double chi = -(rho / r) * (2.0 * lam * big_m - r);
    CMatrix a = cache.y - rho * x;
    a.diagonal().array() += rho * lam;
    const cdouble qg = (2.0 / r) * g_ref.dot(a * g_at);
    return chi + qg.real();
}

ZfSurrogateTerms zf_surrogate_terms(const ZfPerAntennaCache& cache)
{
    const int m_users = cache.n_users();
    const double big_m = m_users;
    ZfSurrogateTerms t;
    t.chi.resize(m_users);
    t.q.resize(m_users, m_users);
    t.f_ref.resize(m_users);
    t.xi.resize(m_users);
    for (int m = 0; m < m_users; ++m) {
        const CMatrix& x = cache.x[static_cast<std::size_t>(m)];
        const double lam = cache.lam_max_x(m);
        const double r = quad(cache.gbar, x);
        if (!(r > 0.0)) {
            throw InvariantError("zf_surrogate_terms: g^H X g is not positive");
        }
        const double rho = quad(cache.gbar, cache.y) / r;
        t.chi(m) = -(rho / r) * (2.0 * lam * big_m - r);
        CMatrix a = cache.y - rho * x;
        a.diagonal().array() += rho * lam;
        t.q.row(m) = (2.0 / r) * (cache.gbar.adjoint() * a);
    }
    for (int m = 0; m < m_users; ++m) {
        t.f_ref(m) = f_value(cache.expansion_point, cache, t, m);
        t.f_grad.push_back(f_gradient(cache.expansion_point, cache, t, m));
        t.xi(m) = xi_bound(cache, t, m);
    }
    return t;
}

double f_value(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m)
{
    double f = 0.0;
    for (int u = 0; u < cache.n_users(); ++u) {
        f += std::abs(terms.q(m, u)) * std::cos(phase_arg(t, cache, terms, m, u));
    }
    return f;
}

Vec2 f_gradient(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m)
{
    Vec2 g = Vec2::Zero();
    for (int u = 0; u < cache.n_users(); ++u) {
        g += std::abs(terms.q(m, u)) * std::sin(phase_arg(t, cache, terms, m, u)) *
             cache.directions[static_cast<std::size_t>(u)];
    }
    return -cache.wave_number * g;
}

Eigen::Matrix2d f_hessian(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m)
{
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (int u = 0; u < cache.n_users(); ++u) {
        const Vec2& a = cache.directions[static_cast<std::size_t>(u)];
        h += std::abs(terms.q(m, u)) * std::cos(phase_arg(t, cache, terms, m, u)) * a * a.transpose();
    }
    return -cache.wave_number * cache.wave_number * h;
}

Eigen::Matrix2d xi_matrix(const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m)
{
    Eigen::Matrix2d xi = Eigen::Matrix2d::Zero();
    for (int u = 0; u < cache.n_users(); ++u) {
        const double w = std::abs(terms.q(m, u));
        const Vec2& a = cache.directions[static_cast<std::size_t>(u)];
        xi(0, 0) += w * a.x() * a.x();
        xi(0, 1) += w * std::abs(a.x() * a.y());
        xi(1, 1) += w * a.y() * a.y();
    }
    xi(1, 0) = xi(0, 1);
    return xi;
}

double xi_bound(const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, int m)
{
    const Eigen::Matrix2d xi = xi_matrix(cache, terms, m);
    return cache.wave_number * cache.wave_number * largest_eigenvalue_2x2(xi(0, 0), xi(0, 1), xi(1, 1));
}

double zf_surrogate_value(const Vec2& t, const ZfPerAntennaCache& cache, const ZfSurrogateTerms& terms, Vec2* grad)
{
    const Vec2 d = t - cache.expansion_point;
    double value = 0.0;
    Vec2 g = Vec2::Zero();
    for (int m = 0; m < cache.n_users(); ++m) {
        const Vec2& fg = terms.f_grad[static_cast<std::size_t>(m)];
        const double s = terms.chi(m) + terms.f_ref(m) + fg.dot(d) - 0.5 * terms.xi(m) * d.squaredNorm();
        const double arg = 1.0 + cache.eta(m) * s;
        if (!(arg > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        value += std::log2(arg);
        g += cache.eta(m) / (arg * std::numbers::ln2) * (fg - terms.xi(m) * d);
    }
    if (grad) {
        *grad = g;
    }
    return value;
}

double zf_objective_at(const Vec2& t, const ZfPerAntennaCache& cache)
{
    double sum = 0.0;
    for (int m = 0; m < cache.n_users(); ++m) {
        sum += rate_lb1(cache, m, t);
    }
    return sum;
}

ZfSubproblem build_zf_subproblem(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg,
                       int n, double curvature_scale)
{
    ZfSubproblem sp;
    sp.cache = build_cache(layout, users, cfg, n);
    sp.terms = zf_surrogate_terms(sp.cache);
    sp.terms.xi *= curvature_scale;
    sp.problem.halfplanes = linearize_distance_constraints(layout, n, cfg.d_min);
    sp.problem.box = Box::from_region(cfg.region);
    sp.problem.start = layout.positions[static_cast<std::size_t>(n)];
    sp.problem.objective = [cache = sp.cache, terms = sp.terms](const Vec2& x, Vec2* grad) {
        return zf_surrogate_value(x, cache, terms, grad);
    };
    return sp;
}

std::vector<HalfPlane> trust_region_polygon(const Vec2& centre, double radius, int sides)
{
    if (sides < 3 || !(radius > 0.0)) {
        throw DomainError("trust_region_polygon: need at least 3 sides and a positive radius");
    }
    std::vector<HalfPlane> out;
    const double apothem = radius * std::cos(std::numbers::pi / sides);
    for (int s = 0; s < sides; ++s) {
        const double ang = 2.0 * std::numbers::pi * s / sides;
        const Vec2 inward(-std::cos(ang), -std::sin(ang));
        out.push_back({inward, inward.dot(centre) - apothem});
    }
    return out;
}

double zf_true_objective(const AntennaLayout& layout, std::span<const UserStats> users, const SystemConfig& cfg)
{
    return zf_ergodic_lower_bound(layout, users, cfg).sum;
}

ZfOptimizationResult optimize_zf(const AntennaLayout& layout0, std::span<const UserStats> users,
                                 const SystemConfig& cfg, const AoOptions& options)
{
    if (!layout0.is_feasible(cfg)) {
        throw DomainError("optimize_zf: initial layout is infeasible");
    }
    ZfOptimizationResult result;
    result.layout = layout0;
    auto& trace = result.trace;
    trace.threshold = options.zeta;
    double objective = zf_true_objective(result.layout, users, cfg);
    trace.initial_objective = objective;

    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        const double sweep_start = objective;
        for (int n = 0; n < result.layout.size(); ++n) {
            ZfSubproblem sp = build_zf_subproblem(result.layout, users, cfg, n, options.curvature_scale);
            SubsolverResult sol = maximize(sp.problem, options.subsolver);
            if (sol.left_domain && !sol.converged) {
                const auto tr = trust_region_polygon(sp.problem.start, cfg.wavelength / 4.0);
                sp.problem.halfplanes.insert(sp.problem.halfplanes.end(), tr.begin(), tr.end());
                sol = maximize(sp.problem, options.subsolver);
                ++result.trust_region_retries;
            }
            AntennaLayout candidate = result.layout;
            candidate.positions[static_cast<std::size_t>(n)] = sol.point;
            TraceEntry entry;
            entry.sweep = sweep;
            entry.antenna = n;
            entry.surrogate = sol.value;
            if (candidate.is_feasible(cfg)) {
                const double candidate_objective = zf_true_objective(candidate, users, cfg);
                entry.accepted = candidate_objective >= objective;
                if (entry.accepted) {
                    result.layout = std::move(candidate);
                    objective = candidate_objective;
                }
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
