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

#include "mats/channel.hpp"
#include "mats/error.hpp"
#include "mats/ergodic.hpp"

#include <catch_amalgamated.hpp>
#include <quadmath.h>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace mats;
using Catch::Approx;
using mats::testing::RunningStats;

namespace {

constexpr double pi = std::numbers::pi;

AntennaLayout layout_of(std::initializer_list<Vec2> pts)
{
    return AntennaLayout{std::vector<Vec2>(pts)};
}

} // namespace

TEST_CASE("direction vector at the axes")
{
    CHECK(direction_vector(0.0, 0.0).norm() == 0.0);
    const Vec2 up = direction_vector(pi / 2, 0.7);
    CHECK(up.x() == Approx(0.0).margin(1e-16));
    CHECK(up.y() == 1.0);
    const Vec2 side = direction_vector(0.0, pi / 2);
    CHECK(side.x() == 1.0);
    CHECK(side.y() == 0.0);
}

TEST_CASE("direction vector components stay in [-1, 1]")
{
    Rng rng = make_stream(3);
    std::uniform_real_distribution<double> a(-pi / 2, pi / 2);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 v = direction_vector(a(rng), a(rng));
        CHECK(v.cwiseAbs().maxCoeff() <= 1.0);
        CHECK(v.norm() <= 1.0 + 1e-15);
    }
}

TEST_CASE("steering vector of co-located antennas is all ones")
{
    UserStats u{0.3, -1.1, 2.0, 1.0, 1.0, 0.0};
    const CVector h = los_steering(layout_of({{0, 0}, {0, 0}, {0, 0}}), u, 1.0);
    CHECK((h - CVector::Ones(3)).norm() == 0.0);
}

TEST_CASE("half-wavelength offset flips the phase")
{
    UserStats u{0.0, pi / 2, 1.0, 1.0, 1.0, 0.0};
    for (double lambda : {1.0, 0.01, 7.5}) {
        const CVector h = los_steering(layout_of({{lambda / 2, 0}}), u, lambda);
        CHECK(h(0).real() == Approx(-1.0).margin(1e-12));
        CHECK(h(0).imag() == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("steering vectors are unit modulus and phase additive")
{
    Rng rng = make_stream(11);
    std::uniform_real_distribution<double> pos(-3, 3);
    const auto users = mats::testing::random_users(4, 1.0, rng);
    for (int trial = 0; trial < 50; ++trial) {
        AntennaLayout layout;
        for (int n = 0; n < 6; ++n) {
            layout.positions.emplace_back(pos(rng), pos(rng));
        }
        const Vec2 shift(pos(rng), pos(rng));
        AntennaLayout moved = layout;
        for (auto& p : moved.positions) {
            p += shift;
        }
        for (const auto& u : users) {
            const CVector h = los_steering(layout, u, 0.8);
            CHECK(h.squaredNorm() == Approx(6.0).epsilon(1e-14));
            for (int n = 0; n < 6; ++n) {
                CHECK(std::abs(std::abs(h(n)) - 1.0) < 1e-14);
            }
            const double k = 2 * pi / 0.8;
            const cdouble rot = std::polar(1.0, k * shift.dot(direction_vector(u)));
            CHECK((los_steering(moved, u, 0.8) - rot * h).norm() < 1e-11);
        }
    }
}

TEST_CASE("large-scale fading")
{
    CHECK(large_scale_fading(1.0, 1e-4, 2.8) == 1e-4);
    CHECK(large_scale_fading(37.0, 1e-4, 0.0) == 1e-4);
    CHECK_THROWS_AS(large_scale_fading(0.0, 1e-4, 2.8), DomainError);
    CHECK_THROWS_AS(large_scale_fading(-2.0, 1e-4, 2.8), DomainError);

    for (double d : {50.0, 55.5, 63.25, 70.0}) {
        const __float128 q = 1e-4Q * expq(-2.8Q * logq(static_cast<__float128>(d)));
        CHECK(large_scale_fading(d, 1e-4, 2.8) == Approx(static_cast<double>(q)).epsilon(1e-14));
    }
}

TEST_CASE("grid factorization and region")
{
    CHECK(grid_factorization(6) == std::pair{2, 3});
    CHECK(grid_factorization(4) == std::pair{2, 2});
    CHECK(grid_factorization(7) == std::pair{1, 7});
    CHECK(grid_factorization(1) == std::pair{1, 1});
    const Region r = region_for_antennas(6, 2.0, 1.0);
    CHECK(r.x_half == 2.0);
    CHECK(r.y_half == 3.0);
}

TEST_CASE("FPA grid and random layouts are feasible")
{
    SystemConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    const AntennaLayout grid = fpa_grid_layout(cfg);
    CHECK(grid.size() == 6);
    CHECK(grid.is_feasible(cfg));
    CHECK(grid.min_pairwise_distance() == Approx(0.5));
    Rng rng = make_stream(5);
    for (int i = 0; i < 100; ++i) {
        const AntennaLayout l = random_feasible_layout(cfg, rng);
        CHECK(l.size() == 6);
        CHECK(l.is_feasible(cfg));
    }
}

TEST_CASE("system config rejects invalid settings")
{
    SystemConfig cfg;
    cfg.n_antennas = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SystemConfig{};
    cfg.wavelength = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SystemConfig{};
    cfg.region = Region{0.1, 0.1};
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SystemConfig{};
    cfg.d_min = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);

    UserStats u;
    u.theta = 2.0;
    CHECK_THROWS_AS(u.validate(), DomainError);
    u = UserStats{};
    u.noise_power = 0.0;
    CHECK_THROWS_AS(u.validate(), DomainError);
    u = UserStats{};
    u.kappa = -1.0;
    CHECK_THROWS_AS(u.validate(), DomainError);
}

TEST_CASE("channel draws are seed deterministic")
{
    SystemConfig cfg;
    Rng urng = make_stream(2);
    const auto users = mats::testing::random_users(5, 6.0, urng);
    const auto layout = fpa_grid_layout(cfg);
    Rng a = make_stream(99, 4);
    Rng b = make_stream(99, 4);
    const ChannelMatrix ha = sample_channel(layout, users, 1.0, a);
    const ChannelMatrix hb = sample_channel(layout, users, 1.0, b);
    CHECK(std::memcmp(ha.data(), hb.data(), sizeof(cdouble) * static_cast<std::size_t>(ha.size())) == 0);
    Rng c = make_stream(99, 5);
    CHECK((sample_channel(layout, users, 1.0, c) - ha).norm() > 0.0);
}

TEST_CASE("very large Rician factor leaves only the LoS part")
{
    SystemConfig cfg;
    Rng urng = make_stream(8);
    auto users = mats::testing::random_users(3, 1e12, urng, 2.5e-9);
    const auto layout = fpa_grid_layout(cfg);
    Rng rng = make_stream(1);
    const ChannelMatrix h = sample_channel(layout, users, 1.0, rng);
    for (int m = 0; m < 3; ++m) {
        const CVector expect = std::sqrt(users[m].beta) * los_steering(layout, users[m], 1.0);
        CHECK((h.col(m) - expect).norm() / expect.norm() < 1e-5);
    }
}

TEST_CASE("channel moments match their closed forms")
{
    SystemConfig cfg;
    Rng urng = make_stream(21);
    auto users = mats::testing::random_users(3, 0.0, urng, 3.0);
    users[1].kappa = 6.0;
    users[2].kappa = 100.0;
    Rng lrng = make_stream(22);
    const auto layout = random_feasible_layout(cfg, lrng);
    const RicianChannel ch(layout, users, 1.0);
    Rng rng = make_stream(23);
    RunningStats entry_var;
    std::vector<RunningStats> e2(3), e4(3);
    ChannelMatrix h;
    for (int s = 0; s < 100000; ++s) {
        ch.sample_into(rng, h);
        entry_var.add(std::norm(h(s % 6, 0)));
        for (int m = 0; m < 3; ++m) {
            const double p = h.col(m).squaredNorm();
            e2[m].add(p);
            e4[m].add(p * p);
        }
    }
    CHECK(std::abs(entry_var.mean - 3.0) <= 3 * entry_var.std_err());
    for (int m = 0; m < 3; ++m) {
        CHECK(std::abs(e2[m].mean - 6 * 3.0) <= 3 * e2[m].std_err());
        const double k = users[m].kappa;
        const double expect = 9.0 * (36.0 + (12.0 * k + 6.0) / ((k + 1) * (k + 1)));
        CHECK(std::abs(e4[m].mean - expect) <= 3 * e4[m].std_err());
        CHECK(mrt_signal_moment(users[m], 6) == Approx(expect).epsilon(1e-14));
    }
}
