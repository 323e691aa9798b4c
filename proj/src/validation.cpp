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

#include "mats/ergodic.hpp"
#include "mats/error.hpp"
#include "mats/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mats {

namespace {

constexpr std::uint64_t kValidateStream = 0x76616c;

std::string fmt(const char* f, double a, double b = 0.0)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

CheckResult upper_check(std::string name, double residual, double tol, std::string detail = {})
{
    return {std::move(name), residual <= tol, residual, tol, std::move(detail)};
}

struct Welford {
    long long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std_err() const { return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)); }
};

// Points for pointwise checks: half over the box, half near the expansion point.
std::vector<Vec2> sample_points(const Box& box, const Vec2& centre, double radius, int count, Rng& rng)
{
    std::uniform_real_distribution<double> ux(box.x_lo, box.x_hi);
    std::uniform_real_distribution<double> uy(box.y_lo, box.y_hi);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        if (i % 2 == 0) {
            pts.emplace_back(ux(rng), uy(rng));
        } else {
            pts.push_back(centre + radius * Vec2(u(rng), u(rng)));
        }
    }
    return pts;
}

double spectral_radius(const Eigen::Matrix2d& h)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues().cwiseAbs().maxCoeff();
}

void moment_checks(const Scenario& sc, const AntennaLayout& layout, long long draws, ValidationReport& report)
{
    const auto m_users = static_cast<int>(sc.users.size());
    const int n = layout.size();
    RicianChannel ch(layout, sc.users, sc.cfg.wavelength);
    Rng rng = make_stream(sc.seed, kValidateStream + 1);
    std::vector<Welford> sig(static_cast<std::size_t>(m_users));
    std::vector<Welford> cross(static_cast<std::size_t>(m_users * m_users));
    ChannelMatrix h(n, m_users);
    for (long long s = 0; s < draws; ++s) {
        ch.sample_into(rng, h);
        for (int m = 0; m < m_users; ++m) {
            const double e = h.col(m).squaredNorm();
            sig[static_cast<std::size_t>(m)].add(e * e);
            for (int j = m + 1; j < m_users; ++j) {
                cross[static_cast<std::size_t>(m * m_users + j)].add(std::norm(h.col(j).dot(h.col(m))));
            }
        }
    }
    const CMatrix hbar = los_matrix(layout, sc.users, sc.cfg.wavelength);
    double worst_sig = 0.0;
    double worst_cross = 0.0;
    for (int m = 0; m < m_users; ++m) {
        const auto& w = sig[static_cast<std::size_t>(m)];
        worst_sig = std::max(worst_sig, std::abs(w.mean - mrt_signal_moment(sc.users[m], n)) / w.std_err());
        for (int j = m + 1; j < m_users; ++j) {
            const auto& c = cross[static_cast<std::size_t>(m * m_users + j)];
            const double los = std::norm(hbar.col(j).dot(hbar.col(m)));
            const double expect = mrt_interference_moment(sc.users[m], sc.users[j], los, n);
            worst_cross = std::max(worst_cross, std::abs(c.mean - expect) / c.std_err());
        }
    }
    report.checks.push_back(upper_check("moment_signal", worst_sig, 3.0, "max |z| of E||h||^4 over users"));
    report.checks.push_back(upper_check("moment_cross", worst_cross, 3.0, "max |z| of E|h_j^H h_m|^2 over pairs"));
}

void mrt_checks(const Scenario& sc, const AntennaLayout& layout, const ValidateOptions& opt, ValidationReport& report)
{
    Rng rng = make_stream(sc.seed, kValidateStream + 2);
    const double lambda = sc.cfg.wavelength;
    double tangency = 0.0;
    double minorization = 0.0;
    double curvature = 0.0;
    double grad_err = 0.0;
    double consistency = 0.0;
    double majorant = 0.0;
    const double truth_at_layout = mrt_ergodic_approx(layout, sc.users, sc.cfg).sum;
    for (int n = 0; n < layout.size(); ++n) {
        const MrtSubproblem sp = build_mrt_subproblem(layout, sc.users, sc.cfg, n, opt.psi_scale);
        const MrtSurrogateTerms& t = sp.terms;
        consistency = std::max(consistency, std::abs(mrt_objective_at(t.expansion_point, t) - truth_at_layout));
        const double truth0 = mrt_objective_at(t.expansion_point, t);
        tangency = std::max(tangency, std::abs(sp.problem.objective(t.expansion_point, nullptr) - truth0));
        const auto pts = sample_points(sp.problem.box, t.expansion_point, lambda / 10.0,
                                       std::max(2, opt.samples / layout.size()), rng);
        for (const Vec2& p : pts) {
            const double truth = mrt_objective_at(p, t);
            minorization = std::max(minorization, (sp.problem.objective(p, nullptr) - truth) / std::max(1.0, truth));
            for (int m = 0; m < t.n_users(); ++m) {
                curvature = std::max(curvature, (spectral_radius(hessian_b(p, t, m)) - t.psi(m)) / std::max(t.psi(m), 1e-300));
                const Vec2 d = p - t.expansion_point;
                const double b_hat = t.b_ref(m) + t.grad_ref[m].dot(d) + 0.5 * t.psi(m) * d.squaredNorm();
                const double b_scale = 2.0 * (t.c1.row(m).array() * t.tau.row(m).array().abs()).sum() + t.c3(m);
                majorant = std::max(majorant, (b_m(p, t, m) - b_hat) / std::max(b_scale, 1e-300));
                const double h = 1e-6 * lambda;
                const Vec2 fd((b_m(p + Vec2(h, 0), t, m) - b_m(p - Vec2(h, 0), t, m)) / (2 * h),
                              (b_m(p + Vec2(0, h), t, m) - b_m(p - Vec2(0, h), t, m)) / (2 * h));
                const double scale = std::max(fd.norm(), 1e-6 * (t.wave_number * t.c1.row(m).sum() * layout.size()));
                grad_err = std::max(grad_err, (grad_b(p, t, m) - fd).norm() / std::max(scale, 1e-300));
            }
        }
    }
    report.checks.push_back(upper_check("mrt_objective_consistency", consistency, 1e-10,
                                        "per-antenna objective vs closed-form sum"));
    report.checks.push_back(upper_check("mrt_tangency", tangency, 1e-9));
    report.checks.push_back(upper_check("mrt_minorization", minorization, 1e-9, "max (surrogate - truth) / truth"));
    report.checks.push_back(upper_check("mrt_b_majorization", majorant, 1e-9,
                                        "max excess of b_m over its quadratic bound, relative to max |b_m|"));
    report.checks.push_back(upper_check("mrt_curvature", curvature, 1e-9, "max relative excess of Hessian spectral radius over psi"));
    report.checks.push_back(upper_check("mrt_gradient", grad_err, 1e-4, "relative error vs central differences"));
}

void zf_checks(const Scenario& sc, const AntennaLayout& layout, const ValidateOptions& opt, ValidationReport& report)
{
    Rng rng = make_stream(sc.seed, kValidateStream + 3);
    const double lambda = sc.cfg.wavelength;
    double woodbury = 0.0;
    double diag_bound = -std::numeric_limits<double>::infinity();
    double consistency = 0.0;
    double tangency = 0.0;
    double mm = 0.0;
    double minorization = 0.0;
    double curvature = 0.0;
    double grad_err = 0.0;
    double eig = 0.0;
    double f_minor = 0.0;
    const ErgodicReport lb = zf_ergodic_lower_bound(layout, sc.users, sc.cfg);
    for (int n = 0; n < layout.size(); ++n) {
        const ZfSubproblem sp = build_zf_subproblem(layout, sc.users, sc.cfg, n, opt.xi_scale);
        const auto& c = sp.cache;
        const auto& t = sp.terms;
        woodbury = std::max(woodbury, c.woodbury_residual);
        const CMatrix sinv = sigma_inverse_direct(c, c.expansion_point);
        for (int m = 0; m < c.n_users(); ++m) {
            diag_bound = std::max(diag_bound, sinv(m, m).real() - c.theta2_inv(m, m).real());
            consistency = std::max(consistency, std::abs(rate_lb1(c, m) - lb.per_user(m)));
            const double frac = 1.0 / sigma_inv_mm(c, m, c.gbar);
            tangency = std::max(tangency, std::abs(t.chi(m) + t.f_ref(m) - frac) / frac);
            std::normal_distribution<double> nd;
            for (int k = 0; k < 4; ++k) {
                CVector x(c.n_users());
                for (auto& v : x) {
                    v = cdouble(nd(rng), nd(rng));
                }
                eig = std::max(eig, (x.dot(c.x[m] * x).real() - c.lam_max_x(m) * x.squaredNorm()) /
                                        (c.lam_max_x(m) * x.squaredNorm()));
            }
        }
        tangency = std::max(tangency, std::abs(sp.problem.objective(c.expansion_point, nullptr) -
                                               zf_objective_at(c.expansion_point, c)));
        const auto pts = sample_points(sp.problem.box, c.expansion_point, lambda / 10.0,
                                       std::max(2, opt.samples / layout.size()), rng);
        for (const Vec2& p : pts) {
            const double truth = zf_objective_at(p, c);
            const double sur = sp.problem.objective(p, nullptr);
            if (std::isfinite(sur)) {
                minorization = std::max(minorization, (sur - truth) / std::max(1.0, truth));
            }
            const CVector g = gbar_at(p, c);
            for (int m = 0; m < c.n_users(); ++m) {
                const double frac = 1.0 / sigma_inv_mm(c, m, g);
                mm = std::max(mm, (mm_minorizer(c, m, g, c.gbar) - frac) / frac);
                curvature = std::max(curvature, (spectral_radius(f_hessian(p, c, t, m)) - t.xi(m)) / std::max(t.xi(m), 1e-300));
                const Vec2 d = p - c.expansion_point;
                const double f_hat = t.f_ref(m) + t.f_grad[m].dot(d) - 0.5 * t.xi(m) * d.squaredNorm();
                const double f_scale = t.q.row(m).cwiseAbs().sum();
                f_minor = std::max(f_minor, (f_hat - f_value(p, c, t, m)) / std::max(f_scale, 1e-300));
                const double h = 1e-6 * lambda;
                const Vec2 fd((f_value(p + Vec2(h, 0), c, t, m) - f_value(p - Vec2(h, 0), c, t, m)) / (2 * h),
                              (f_value(p + Vec2(0, h), c, t, m) - f_value(p - Vec2(0, h), c, t, m)) / (2 * h));
                const double scale = std::max(fd.norm(), 1e-6 * c.wave_number * t.q.row(m).cwiseAbs().sum());
                grad_err = std::max(grad_err, (f_gradient(p, c, t, m) - fd).norm() / std::max(scale, 1e-300));
            }
        }
    }
    report.checks.push_back(upper_check("zf_woodbury", woodbury, 1e-9, "relative residual vs dense inverse"));
    report.checks.push_back(upper_check("zf_diag_bound", diag_bound, 1e-12, "max [Sigma^-1]_mm - [Theta2^-1]_mm"));
    report.checks.push_back(upper_check("zf_objective_consistency", consistency, 1e-10));
    report.checks.push_back(upper_check("zf_lambda_max", eig, 1e-9, "max Rayleigh quotient excess over lambda_max"));
    report.checks.push_back(upper_check("zf_tangency", tangency, 1e-9));
    report.checks.push_back(upper_check("zf_mm_minorizer", mm, 1e-9, "max (f - fraction) / fraction"));
    report.checks.push_back(upper_check("zf_minorization", minorization, 1e-9, "max (surrogate - truth) / truth"));
    report.checks.push_back(upper_check("zf_f_minorization", f_minor, 1e-9,
                                        "max excess of the quadratic bound over F_m, relative to max |F_m|"));
    report.checks.push_back(upper_check("zf_curvature", curvature, 1e-9, "max relative excess of Hessian spectral radius over xi"));
    report.checks.push_back(upper_check("zf_gradient", grad_err, 1e-4, "relative error vs central differences"));
}

void mc_checks(const Scenario& sc, const AntennaLayout& layout, const ValidateOptions& opt, ValidationReport& report)
{
    McOptions mc;
    mc.n_samples = sc.mc_samples;
    mc.seed = sc.seed;
    mc.threads = opt.threads;
    const ErgodicReport zf_mc = mc_ergodic_rate(layout, sc.users, sc.cfg, Beamformer::zf, mc);
    const ErgodicReport zf_lb = zf_ergodic_lower_bound(layout, sc.users, sc.cfg);
    const ErgodicReport mrt_mc = mc_ergodic_rate(layout, sc.users, sc.cfg, Beamformer::mrt, mc);
    const ErgodicReport mrt_ap = mrt_ergodic_approx(layout, sc.users, sc.cfg);
    double jensen = -std::numeric_limits<double>::infinity();
    double approx = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < zf_mc.per_user.size(); ++m) {
        jensen = std::max(jensen, (zf_lb.per_user(m) - zf_mc.per_user(m)) / (*zf_mc.mc_std_err)(m));
        const double slack = 0.05 * mrt_mc.per_user(m) + 3.0 * (*mrt_mc.mc_std_err)(m);
        approx = std::max(approx, std::abs(mrt_ap.per_user(m) - mrt_mc.per_user(m)) / slack);
    }
    report.checks.push_back(upper_check("zf_jensen", jensen, 3.0, "max (bound - MC) / stderr over users"));
    report.checks.push_back(upper_check("mrt_approximation", approx, 1.0,
                                        "max |approx - MC| / (5% MC + 3 stderr) over users"));
}

void optimizer_checks(const Scenario& sc, const AntennaLayout& layout, ValidationReport& report)
{
    AoOptions ao = sc.optimizer;
    const auto monotone = [&](const OptimizerTrace& tr) {
        double worst = 0.0;
        double prev = tr.initial_objective;
        for (const auto& e : tr.iterations) {
            worst = std::max(worst, prev - e.objective);
            prev = e.objective;
            if (!e.layout.is_feasible(sc.cfg)) {
                worst = std::numeric_limits<double>::infinity();
            }
        }
        return worst;
    };
    const auto mrt = optimize_mrt(layout, sc.users, sc.cfg, ao);
    report.checks.push_back(upper_check("mrt_monotone", monotone(mrt.trace), 1e-9,
                                        fmt("%g -> %g", mrt.trace.initial_objective, mrt.trace.final_objective()) +
                                            " after " + std::to_string(mrt.trace.sweeps) + " sweeps" +
                                            (mrt.trace.converged ? "" : " (sweep cap)")));
    const auto zf = optimize_zf(layout, sc.users, sc.cfg, ao);
    report.checks.push_back(upper_check("zf_monotone", monotone(zf.trace), 1e-9,
                                        fmt("%g -> %g", zf.trace.initial_objective, zf.trace.final_objective()) +
                                            " after " + std::to_string(zf.trace.sweeps) + " sweeps" +
                                            (zf.trace.converged ? "" : " (sweep cap)")));

    // Single-user and pure-NLoS copies: the objective must not move.
    ao.max_sweeps = 3;
    double drift = 0.0;
    Scenario single = sc;
    single.users.resize(1);
    single.cfg.n_users = 1;
    Scenario nlos = sc;
    for (auto& u : nlos.users) {
        u.kappa = 0.0;
    }
    for (const Scenario* s : {&single, &nlos}) {
        for (const auto& tr : {optimize_mrt(layout, s->users, s->cfg, ao).trace,
                               optimize_zf(layout, s->users, s->cfg, ao).trace}) {
            for (const auto& e : tr.iterations) {
                drift = std::max(drift, std::abs(e.objective - tr.initial_objective));
            }
        }
    }
    report.checks.push_back(upper_check("position_invariance", drift, 1e-12, "M = 1 and all-kappa = 0 copies"));
}

} // namespace

ValidationReport validate(const Scenario& scenario, const ValidateOptions& options)
{
    scenario.validate();
    ValidationReport report;
    Rng rng = make_stream(scenario.seed, kValidateStream);
    const AntennaLayout random_layout = random_feasible_layout(scenario.cfg, rng);
    const AntennaLayout fpa = fpa_grid_layout(scenario.cfg);
    moment_checks(scenario, random_layout, options.moment_samples, report);
    mrt_checks(scenario, random_layout, options, report);
    zf_checks(scenario, random_layout, options, report);
    mc_checks(scenario, fpa, options, report);
    optimizer_checks(scenario, fpa, report);
    return report;
}

} // namespace mats
