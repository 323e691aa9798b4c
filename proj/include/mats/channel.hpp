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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace mats {

using cdouble = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// One instantaneous N x M channel realization, column m is h_m(t).
using ChannelMatrix = CMatrix;

// Random source used for every stochastic draw in the library.
using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, stream index). Streams with
// different indices are decorrelated through a splitmix64 finalizer.
Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0);

// Axis-aligned movable region [-x_half, x_half] x [-y_half, y_half].
struct Region {
    double x_half = 1.0;
    double y_half = 1.0;

    bool contains(const Vec2& p, double tol = 1e-12) const
    {
        return std::abs(p.x()) <= x_half + tol && std::abs(p.y()) <= y_half + tol;
    }
};

struct SystemConfig {
    int n_antennas = 6;
    int n_users = 5;
    double wavelength = 1.0;  // meters
    double p_tot = 1.0;       // watts
    double d_min = 0.5;       // meters
    Region region{2.0, 3.0};
    double beta0 = 1e-4;      // linear gain at 1 m
    double alpha = 2.8;

    // Throws DomainError when an invariant is violated, including the
    // requirement that the fixed-position grid fits inside the region.
    void validate() const;
};

struct UserStats {
    double theta = 0.0;        // elevation AoD, radians
    double phi = 0.0;          // azimuth AoD, radians
    double kappa = 0.0;        // Rician factor
    double beta = 1.0;         // large-scale gain
    double noise_power = 1.0;  // watts
    double distance = 0.0;     // meters, informational

    void validate() const;
};

struct AntennaLayout {
    std::vector<Vec2> positions;

    int size() const { return static_cast<int>(positions.size()); }
    double min_pairwise_distance() const;
    bool is_feasible(const SystemConfig& cfg, double tol = 1e-9) const;
};

// Most-square factorization N = rows * cols with rows <= cols.
std::pair<int, int> grid_factorization(int n);

// Region of half-widths (rows * A * lambda / 2, cols * A * lambda / 2) for
// the factorization of N returned by grid_factorization.
Region region_for_antennas(int n_antennas, double region_a, double wavelength);

// Uniform grid centred at the origin with spacing max(lambda/2, d_min),
// rows along x and cols along y. This is the fixed-position baseline and the
// default starting point of both position optimizers.
AntennaLayout fpa_grid_layout(const SystemConfig& cfg);

// Uniform positions in cfg.region, placed one at a time with rejection
// against d_min. Throws DomainError after max_attempts restarts.
AntennaLayout random_feasible_layout(const SystemConfig& cfg, Rng& rng, int max_attempts = 1000);

// a_m = [cos(theta) sin(phi), sin(theta)].
Vec2 direction_vector(double theta, double phi);

inline Vec2 direction_vector(const UserStats& user)
{
    return direction_vector(user.theta, user.phi);
}

// LoS steering vector, entry n = exp(j 2pi/lambda t_n^T a_m).
CVector los_steering(const AntennaLayout& layout, const UserStats& user, double wavelength);

// N x M matrix whose columns are the LoS steering vectors.
CMatrix los_matrix(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength);

// beta0 * d^-alpha. Throws DomainError for distance <= 0.
double large_scale_fading(double distance, double beta0, double alpha);

// Precomputed Rician channel statistics for a fixed layout. Draws are
// h_m = sqrt(kappa beta/(kappa+1)) hbar_m + sqrt(beta/(kappa+1)) htilde_m.
class RicianChannel {
public:
    RicianChannel(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength);

    int n_antennas() const { return static_cast<int>(los_.rows()); }
    int n_users() const { return static_cast<int>(los_.cols()); }

    // Deterministic part sqrt(kappa beta/(kappa+1)) hbar_m, column-wise.
    const CMatrix& mean() const { return los_; }
    const Eigen::VectorXd& nlos_scale() const { return nlos_scale_; }

    ChannelMatrix sample(Rng& rng) const;
    void sample_into(Rng& rng, ChannelMatrix& out) const;

private:
    CMatrix los_;
    Eigen::VectorXd nlos_scale_;
};

ChannelMatrix sample_channel(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength,
                             Rng& rng);

} // namespace mats
