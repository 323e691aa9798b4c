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

#include "mats/ergodic.hpp"
#include "mats/error.hpp"
#include "mats/mrt_optimizer.hpp"
#include "mats/scenario.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace mats;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

struct Fixture {
    SystemConfig cfg;
    std::vector<UserStats> users;
    AntennaLayout layout;
};

Fixture fixture(std::uint64_t seed, int n, int m, double kappa)
{
    Fixture f;
    f.cfg = mats::testing::small_config(n, m);
    Rng rng = make_stream(seed);
    f.users = mats::testing::random_users(m, kappa, rng, 1e-9, 1e-11);
    for (std::size_t i = 0; i < f.users.size(); ++i) {
        f.users[i].kappa = kappa * (1.0 + 0.3 * static_cast<double>(i));
    }
    f.layout = random_feasible_layout(f.cfg, rng);
    return f;
}

Vec2 random_point(const SystemConfig& cfg, Rng& rng)
{
    std::uniform_real_distribution<double> ux(-cfg.region.x_half, cfg.region.x_half);
    std::uniform_real_distribution<double> uy(-cfg.region.y_half, cfg.region.y_half);
    return {ux(rng), uy(rng)};
}

double lambda_max(const Eigen::Matrix2d& h)
{
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(h).eigenvalues().maxCoeff();
}

} // namespace

TEST_CASE("tau special cases")
{
    Fixture f = fixture(1, 6, 3, 6.0);
    f.users[1].theta = f.users[0].theta;
    f.users[1].phi = f.users[0].phi;
    const cdouble t = tau(f.layout, f.users, 2, 0, 1, 1.0);
    CHECK(t.real() == Approx(5.0).epsilon(1e-14));
    CHECK(t.imag() == Approx(0.0).margin(1e-14));

    Fixture two = fixture(2, 2, 3, 6.0);
    for (int n = 0; n < 2; ++n) {
        CHECK(std::abs(tau(two.layout, two.users, n, 0, 2, 1.0)) == Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("LoS cross term from tau matches the direct inner product")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Fixture f = fixture(seed, 6, 4, 3.0);
        const MrtSurrogateTerms t = mrt_surrogate_terms(f.layout, f.users, f.cfg, static_cast<int>(seed % 6));
        for (int m = 0; m < 4; ++m) {
            for (int j = 0; j < 4; ++j) {
                if (j == m) {
                    continue;
                }
                const double direct =
                    std::norm(los_steering(f.layout, f.users[j], 1.0).dot(los_steering(f.layout, f.users[m], 1.0)));
                const double via_tau = std::norm(t.tau(m, j)) + 1.0 +
                                       2.0 * std::abs(t.tau(m, j)) *
                                           std::cos(t.wave_number * t.expansion_point.dot(Vec2(t.ax(m, j), t.ay(m, j))) -
                                                    std::arg(t.tau(m, j)));
                CHECK(via_tau == Approx(direct).epsilon(1e-10));
                CHECK(std::abs(t.tau(m, j)) <= 5.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("surrogate terms reproduce the closed-form MRT sum")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Fixture f = fixture(seed, 6, 5, 6.0);
        const double truth = mrt_ergodic_approx(f.layout, f.users, f.cfg).sum;
        for (int n = 0; n < 6; ++n) {
            const MrtSurrogateTerms t = mrt_surrogate_terms(f.layout, f.users, f.cfg, n);
            CHECK(mrt_objective_at(t.expansion_point, t) == Approx(truth).epsilon(1e-10));
            for (int m = 0; m < 5; ++m) {
                CHECK(t.c2(m) > 0.0);
                CHECK(t.c3(m) > 0.0);
                CHECK(t.psi(m) >= 0.0);
            }
        }
    }
}

TEST_CASE("b_m reaches its cosine maximum and has zero gradient there")
{
    const Fixture f = fixture(3, 4, 2, 6.0);
    const MrtSurrogateTerms t = mrt_surrogate_terms(f.layout, f.users, f.cfg, 1);
    const Vec2 a(t.ax(0, 1), t.ay(0, 1));
    const Vec2 peak = a * (std::arg(t.tau(0, 1)) / (t.wave_number * a.squaredNorm()));
    CHECK(b_m(peak, t, 0) == Approx(2.0 * t.c1(0, 1) * std::abs(t.tau(0, 1))).epsilon(1e-12));
    CHECK(grad_b(peak, t, 0).norm() <= 1e-9 * t.wave_number * t.c1(0, 1) * std::abs(t.tau(0, 1)));
}

TEST_CASE("single user has a flat surrogate")
{
    const Fixture f = fixture(4, 6, 1, 6.0);
    const MrtSubproblem sp = build_mrt_subproblem(f.layout, f.users, f.cfg, 2);
    Rng rng = make_stream(4);
    CHECK(sp.terms.psi(0) == 0.0);
    const double v0 = sp.problem.objective(sp.terms.expansion_point, nullptr);
    for (int i = 0; i < 50; ++i) {
        const Vec2 p = random_point(f.cfg, rng);
        CHECK(b_m(p, sp.terms, 0) == 0.0);
        CHECK(grad_b(p, sp.terms, 0).norm() == 0.0);
        CHECK(sp.problem.objective(p, nullptr) == v0);
    }
}

TEST_CASE("b_m gradient and Hessian match finite differences")
{
    Rng rng = make_stream(5);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Fixture f = fixture(seed, 6, 5, 6.0);
        const MrtSurrogateTerms t = mrt_surrogate_terms(f.layout, f.users, f.cfg, 0);
        const double h = 1e-6;
        for (int i = 0; i < 20; ++i) {
            const Vec2 p = random_point(f.cfg, rng);
            for (int m = 0; m < 5; ++m) {
                const Vec2 fd((b_m(p + Vec2(h, 0), t, m) - b_m(p - Vec2(h, 0), t, m)) / (2 * h),
                              (b_m(p + Vec2(0, h), t, m) - b_m(p - Vec2(0, h), t, m)) / (2 * h));
                const double scale = t.wave_number * 2.0 * (t.c1.row(m).array() * t.tau.row(m).array().abs()).sum();
                CHECK((grad_b(p, t, m) - fd).norm() <= 1e-4 * std::max(fd.norm(), 1e-3 * scale));

                const double hh = 1e-5;
                Eigen::Matrix2d fdh;
                fdh.col(0) = (grad_b(p + Vec2(hh, 0), t, m) - grad_b(p - Vec2(hh, 0), t, m)) / (2 * hh);
                fdh.col(1) = (grad_b(p + Vec2(0, hh), t, m) - grad_b(p - Vec2(0, hh), t, m)) / (2 * hh);
                CHECK((hessian_b(p, t, m) - fdh).norm() <= 1e-5 * t.wave_number * scale);
            }
        }
    }
}

TEST_CASE("psi bounds the b_m Hessian")
{
    Fixture f = fixture(6, 6, 4, 6.0);
    for (auto& u : f.users) {
        u.theta = 0.4;  // equal elevations zero out the y components
    }
    const MrtSurrogateTerms d = mrt_surrogate_terms(f.layout, f.users, f.cfg, 3);
    for (int m = 0; m < 4; ++m) {
        double psi11 = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (j != m) {
                psi11 += d.c1(m, j) * std::abs(d.tau(m, j)) * d.ax(m, j) * d.ax(m, j);
            }
        }
        CHECK(psi_matrix(d, m)(0, 1) == 0.0);
        CHECK(d.psi(m) == Approx(8 * pi * pi * psi11).epsilon(1e-12));
    }

    Rng rng = make_stream(6);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Fixture g = fixture(seed, 6, 5, 6.0);
        for (int n = 0; n < 6; ++n) {
            const MrtSurrogateTerms t = mrt_surrogate_terms(g.layout, g.users, g.cfg, n);
            for (int m = 0; m < 5; ++m) {
                const Eigen::Matrix2d p = psi_matrix(t, m);
                const double explicit_form = 4 * pi * pi *
                    (p(0, 0) + p(1, 1) + std::sqrt((p(0, 0) - p(1, 1)) * (p(0, 0) - p(1, 1)) + 4 * p(0, 1) * p(0, 1)));
                CHECK(t.psi(m) == Approx(explicit_form).epsilon(1e-12));
                CHECK(t.psi(m) <= psi_frobenius_bound(t, m) * (1 + 1e-12));
                for (int i = 0; i < 40; ++i) {
                    CHECK(lambda_max(hessian_b(random_point(g.cfg, rng), t, m)) <= t.psi(m) * (1 + 1e-12));
                }
            }
        }
    }
}

TEST_CASE("MRT surrogate is tight at the expansion point and minorizes elsewhere")
{
    Rng rng = make_stream(7);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Fixture f = fixture(seed, 6, 5, seed % 2 ? 6.0 : 100.0);
        for (int n = 0; n < 6; ++n) {
            const MrtSubproblem sp = build_mrt_subproblem(f.layout, f.users, f.cfg, n);
            const auto& t = sp.terms;
            CHECK(sp.problem.objective(t.expansion_point, nullptr) ==
                  Approx(mrt_objective_at(t.expansion_point, t)).epsilon(1e-12));
            CHECK(sp.problem.is_feasible(sp.problem.start));
            for (int i = 0; i < 20; ++i) {
                const Vec2 p = random_point(f.cfg, rng);
                CHECK(sp.problem.objective(p, nullptr) <= mrt_objective_at(p, t) + 1e-12);
            }
        }
    }
}

TEST_CASE("MRT surrogate gradient matches finite differences")
{
    Rng rng = make_stream(8);
    const Fixture f = fixture(8, 6, 5, 6.0);
    const MrtSubproblem sp = build_mrt_subproblem(f.layout, f.users, f.cfg, 4);
    for (int i = 0; i < 100; ++i) {
        const Vec2 p = random_point(f.cfg, rng);
        Vec2 g;
        sp.problem.objective(p, &g);
        const double h = 1e-6;
        const Vec2 fd((sp.problem.objective(p + Vec2(h, 0), nullptr) - sp.problem.objective(p - Vec2(h, 0), nullptr)) / (2 * h),
                      (sp.problem.objective(p + Vec2(0, h), nullptr) - sp.problem.objective(p - Vec2(0, h), nullptr)) / (2 * h));
        CHECK((g - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
    }
}

TEST_CASE("optimizer leaves single-user and Rayleigh layouts unchanged")
{
    for (auto [m, kappa] : {std::pair{1, 6.0}, std::pair{5, 0.0}}) {
        Scenario sc = default_scenario(3, kappa);
        if (m == 1) {
            sc.user_gen->n_users = 1;
            sc.cfg.n_users = 1;
            sc = generate_scenario(sc);
        }
        const AntennaLayout l0 = fpa_grid_layout(sc.cfg);
        const auto r = optimize_mrt(l0, sc.users, sc.cfg);
        CHECK(r.trace.sweeps == 1);
        CHECK(r.trace.converged);
        CHECK(r.trace.final_objective() == Approx(r.trace.initial_objective).epsilon(1e-12));
        for (int n = 0; n < l0.size(); ++n) {
            CHECK((r.layout.positions[n] - l0.positions[n]).norm() == 0.0);
        }
    }
}

TEST_CASE("optimizer improves on the grid and keeps a monotone feasible trace")
{
    for (double kappa : {6.0, 100.0}) {
        const Scenario sc = default_scenario(2, kappa);
        const auto r = optimize_mrt(fpa_grid_layout(sc.cfg), sc.users, sc.cfg);
        CHECK(r.trace.final_objective() > r.trace.initial_objective);
        CHECK(r.layout.is_feasible(sc.cfg));
        double prev = r.trace.initial_objective;
        for (const auto& e : r.trace.iterations) {
            CHECK(e.objective >= prev);
            CHECK(e.layout.is_feasible(sc.cfg));
            prev = e.objective;
        }
        CHECK(r.trace.final_objective() == Approx(mrt_true_objective(r.layout, sc.users, sc.cfg)).epsilon(1e-14));
    }
}

TEST_CASE("optimizer rejects an infeasible start")
{
    const Scenario sc = default_scenario(1);
    AntennaLayout bad = fpa_grid_layout(sc.cfg);
    bad.positions[1] = bad.positions[0];
    CHECK_THROWS_AS(optimize_mrt(bad, sc.users, sc.cfg), DomainError);
}
