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

#include "mats/channel.hpp"
#include "mats/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mats {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr double kHalfPi = std::numbers::pi / 2.0;

} // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

std::pair<int, int> grid_factorization(int n)
{
    if (n < 1) {
        throw DomainError("grid_factorization: n must be positive");
    }
    int rows = 1;
    for (int r = 1; r * r <= n; ++r) {
        if (n % r == 0) {
            rows = r;
        }
    }
    return {rows, n / rows};
}

Region region_for_antennas(int n_antennas, double region_a, double wavelength)
{
    if (region_a <= 0.0 || wavelength <= 0.0) {
        throw DomainError("region_for_antennas: A and wavelength must be positive");
    }
    const auto [rows, cols] = grid_factorization(n_antennas);
    return Region{rows * region_a * wavelength / 2.0, cols * region_a * wavelength / 2.0};
}

AntennaLayout fpa_grid_layout(const SystemConfig& cfg)
{
    const auto [rows, cols] = grid_factorization(cfg.n_antennas);
    const double spacing = std::max(cfg.wavelength / 2.0, cfg.d_min);
    AntennaLayout layout;
    layout.positions.reserve(cfg.n_antennas);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            layout.positions.emplace_back((r - (rows - 1) / 2.0) * spacing, (c - (cols - 1) / 2.0) * spacing);
        }
    }
    return layout;
}

AntennaLayout random_feasible_layout(const SystemConfig& cfg, Rng& rng, int max_attempts)
{
    std::uniform_real_distribution<double> ux(-cfg.region.x_half, cfg.region.x_half);
    std::uniform_real_distribution<double> uy(-cfg.region.y_half, cfg.region.y_half);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        AntennaLayout layout;
        bool ok = true;
        for (int n = 0; n < cfg.n_antennas && ok; ++n) {
            ok = false;
            for (int tries = 0; tries < 1000; ++tries) {
                const Vec2 p(ux(rng), uy(rng));
                bool clear = true;
                for (const auto& q : layout.positions) {
                    if ((p - q).norm() < cfg.d_min) {
                        clear = false;
                        break;
                    }
                }
                if (clear) {
                    layout.positions.push_back(p);
                    ok = true;
                    break;
                }
            }
        }
        if (ok) {
            return layout;
        }
    }
    throw DomainError("random_feasible_layout: could not place antennas");
}

void SystemConfig::validate() const
{
    if (n_antennas < 1 || n_users < 1) {
        throw DomainError("SystemConfig: n_antennas and n_users must be >= 1");
    }
    if (!(wavelength > 0.0)) {
        throw DomainError("SystemConfig: wavelength must be positive");
    }
    if (!(p_tot >= 0.0) || !std::isfinite(p_tot)) {
        throw DomainError("SystemConfig: p_tot must be finite and nonnegative");
    }
    if (!(d_min >= 0.0)) {
        throw DomainError("SystemConfig: d_min must be nonnegative");
    }
    if (!(region.x_half > 0.0) || !(region.y_half > 0.0)) {
        throw DomainError("SystemConfig: region half-widths must be positive");
    }
    if (!(beta0 > 0.0)) {
        throw DomainError("SystemConfig: beta0 must be positive");
    }
    if (!fpa_grid_layout(*this).is_feasible(*this)) {
        throw DomainError("SystemConfig: region of " + std::to_string(2 * region.x_half) + " x " +
                          std::to_string(2 * region.y_half) + " cannot hold a half-wavelength grid of " +
                          std::to_string(n_antennas) + " antennas");
    }
}

void UserStats::validate() const
{
    if (!(kappa >= 0.0)) {
        throw DomainError("UserStats: kappa must be nonnegative");
    }
    if (!(beta > 0.0)) {
        throw DomainError("UserStats: beta must be positive");
    }
    if (!(noise_power > 0.0)) {
        throw DomainError("UserStats: noise_power must be positive");
    }
    if (std::abs(theta) > kHalfPi + 1e-12 || std::abs(phi) > kHalfPi + 1e-12) {
        throw DomainError("UserStats: angles must lie in [-pi/2, pi/2]");
    }
}

double AntennaLayout::min_pairwise_distance() const
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            best = std::min(best, (positions[i] - positions[j]).norm());
        }
    }
    return best;
}

bool AntennaLayout::is_feasible(const SystemConfig& cfg, double tol) const
{
    if (size() != cfg.n_antennas) {
        return false;
    }
    for (const auto& p : positions) {
        if (!p.allFinite() || !cfg.region.contains(p, tol)) {
            return false;
        }
    }
    return size() < 2 || min_pairwise_distance() >= cfg.d_min - tol;
}

Vec2 direction_vector(double theta, double phi)
{
    return Vec2(std::cos(theta) * std::sin(phi), std::sin(theta));
}

CVector los_steering(const AntennaLayout& layout, const UserStats& user, double wavelength)
{
    const double k = 2.0 * std::numbers::pi / wavelength;
    const Vec2 a = direction_vector(user);
    CVector h(layout.size());
    for (int n = 0; n < layout.size(); ++n) {
        h(n) = std::polar(1.0, k * layout.positions[n].dot(a));
    }
    return h;
}

CMatrix los_matrix(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength)
{
    CMatrix hbar(layout.size(), static_cast<Eigen::Index>(users.size()));
    for (std::size_t m = 0; m < users.size(); ++m) {
        hbar.col(static_cast<Eigen::Index>(m)) = los_steering(layout, users[m], wavelength);
    }
    return hbar;
}

double large_scale_fading(double distance, double beta0, double alpha)
{
    if (!(distance > 0.0)) {
        throw DomainError("large_scale_fading: distance must be positive");
    }
    return beta0 * std::pow(distance, -alpha);
}

RicianChannel::RicianChannel(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength)
    : los_(los_matrix(layout, users, wavelength)), nlos_scale_(static_cast<Eigen::Index>(users.size()))
{
    for (std::size_t m = 0; m < users.size(); ++m) {
        const auto& u = users[m];
        const auto col = static_cast<Eigen::Index>(m);
        los_.col(col) *= std::sqrt(u.kappa * u.beta / (u.kappa + 1.0));
        nlos_scale_(col) = std::sqrt(u.beta / (u.kappa + 1.0));
    }
}

void RicianChannel::sample_into(Rng& rng, ChannelMatrix& out) const
{
    // Each complex entry CN(0,1): real and imaginary parts N(0, 1/2).
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
    out.resize(los_.rows(), los_.cols());
    for (Eigen::Index m = 0; m < los_.cols(); ++m) {
        for (Eigen::Index n = 0; n < los_.rows(); ++n) {
            const double re = normal(rng);
            const double im = normal(rng);
            out(n, m) = los_(n, m) + nlos_scale_(m) * cdouble(re, im);
        }
    }
}

ChannelMatrix RicianChannel::sample(Rng& rng) const
{
    ChannelMatrix h;
    sample_into(rng, h);
    return h;
}

ChannelMatrix sample_channel(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength,
                             Rng& rng)
{
    return RicianChannel(layout, users, wavelength).sample(rng);
}

} // namespace mats
