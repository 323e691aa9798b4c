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

#include "mats/beamforming.hpp"
#include "mats/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mats {

namespace {

void check_dims(const ChannelMatrix& h, const Eigen::VectorXd& noise)
{
    if (noise.size() != h.cols()) {
        throw DomainError("noise vector length does not match the number of users");
    }
    if ((noise.array() <= 0.0).any()) {
        throw DomainError("noise powers must be positive");
    }
}

// Unscaled pseudo-inverse directions H (H^H H)^-1 via a rank-revealing QR.
CMatrix pinv_directions(const ChannelMatrix& h)
{
    const auto n = h.rows();
    const auto m = h.cols();
    if (n <= m) {
        throw RankError("ZF requires more antennas than users (N=" + std::to_string(n) + ", M=" + std::to_string(m) +
                        ")");
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(h);
    qr.setThreshold(1e-12);
    if (qr.rank() < m) {
        throw RankError("channel matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(m) + ")");
    }
    const CMatrix r = qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
    const CMatrix q = qr.householderQ() * CMatrix::Identity(n, m);
    const CMatrix r_inv_h = r.adjoint().triangularView<Eigen::Lower>().solve(CMatrix::Identity(m, m));
    return q * r_inv_h * qr.colsPermutation().transpose();
}

double sum_rate_of(const ChannelMatrix& h, const BeamformingMatrix& w, const Eigen::VectorXd& noise)
{
    return rate_report(h, w, noise).sum_rate;
}

} // namespace

RateReport rate_report(const ChannelMatrix& h, const BeamformingMatrix& w, const Eigen::VectorXd& noise)
{
    if (h.rows() != w.rows() || h.cols() != w.cols() || noise.size() != h.cols()) {
        throw DomainError("rate_report: nonconforming dimensions");
    }
    const auto m_users = h.cols();
    // g(m, j) = h_m^H w_j
    const CMatrix g = h.adjoint() * w;
    RateReport report;
    report.sinr.resize(m_users);
    report.per_user_rate.resize(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const double signal = std::norm(g(m, m));
        const double interference = g.row(m).cwiseAbs2().sum() - signal;
        report.sinr(m) = signal / (std::max(interference, 0.0) + noise(m));
        report.per_user_rate(m) = std::log2(1.0 + report.sinr(m));
    }
    report.sum_rate = report.per_user_rate.sum();
    return report;
}

double total_power(const BeamformingMatrix& w)
{
    return w.squaredNorm();
}

BeamformingMatrix mrt_beamformer(const ChannelMatrix& h, double p_tot)
{
    const double gain = h.squaredNorm();
    if (!(gain > 0.0)) {
        throw DegenerateChannelError("mrt_beamformer: channel is identically zero");
    }
    return std::sqrt(p_tot / gain) * h;
}

BeamformingMatrix mrt_directions(const ChannelMatrix& h, const Eigen::VectorXd& powers)
{
    BeamformingMatrix w(h.rows(), h.cols());
    for (Eigen::Index m = 0; m < h.cols(); ++m) {
        const double norm = h.col(m).norm();
        if (!(norm > 0.0)) {
            throw DegenerateChannelError("mrt_directions: zero channel for a user");
        }
        w.col(m) = std::sqrt(powers(m)) / norm * h.col(m);
    }
    return w;
}

BeamformingMatrix zf_directions(const ChannelMatrix& h, const Eigen::VectorXd& powers)
{
    CMatrix w = pinv_directions(h);
    for (Eigen::Index m = 0; m < w.cols(); ++m) {
        w.col(m) *= std::sqrt(powers(m)) / w.col(m).norm();
    }
    return w;
}

BeamformingMatrix zf_beamformer(const ChannelMatrix& h, double p_tot)
{
    const auto m = h.cols();
    return zf_directions(h, Eigen::VectorXd::Constant(m, p_tot / static_cast<double>(m)));
}

Eigen::VectorXd zf_gains(const ChannelMatrix& h)
{
    const CMatrix w = pinv_directions(h);
    return w.colwise().squaredNorm().cwiseInverse().transpose();
}

Eigen::VectorXd water_fill(const Eigen::VectorXd& cnr, double p_tot)
{
    const auto m = cnr.size();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    if (m == 0 || p_tot <= 0.0) {
        return p;
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cnr(a) > cnr(b); });
    if (!(cnr(order.front()) > 0.0)) {
        throw DomainError("water_fill: no user has a positive channel-to-noise ratio");
    }

    // Largest active set whose water level clears every active floor.
    double level = 0.0;
    std::size_t active = 0;
    double inv_sum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const double a = cnr(order[k]);
        if (!(a > 0.0)) {
            break;
        }
        inv_sum += 1.0 / a;
        const double candidate = (p_tot + inv_sum) / static_cast<double>(k + 1);
        if (candidate > 1.0 / a) {
            level = candidate;
            active = k + 1;
        } else {
            break;
        }
    }
    for (std::size_t k = 0; k < active; ++k) {
        const auto i = order[k];
        p(i) = std::max(0.0, level - 1.0 / cnr(i));
    }
    // Remove rounding drift so the budget is met exactly.
    const double total = p.sum();
    if (total > 0.0) {
        p *= p_tot / total;
    }
    return p;
}

Eigen::VectorXd zf_waterfilling_power(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise)
{
    check_dims(h, noise);
    const Eigen::VectorXd cnr = zf_gains(h).cwiseQuotient(noise);
    return water_fill(cnr, p_tot);
}

BeamformingMatrix zf_waterfilling_beamformer(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise)
{
    return zf_directions(h, zf_waterfilling_power(h, p_tot, noise));
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double total)
{
    const auto m = v.size();
    std::vector<double> sorted(v.data(), v.data() + m);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double shift = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double t = (cumulative - total) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - t > 0.0) {
            shift = t;
        }
    }
    return (v.array() - shift).max(0.0).matrix();
}

PowerOptResult mrt_power_optimization(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise, int steps)
{
    check_dims(h, noise);
    const auto m_users = h.cols();
    // coupling(m, j) = |h_m^H u_j|^2 with unit-norm MRT directions u_j.
    const BeamformingMatrix u = mrt_directions(h, Eigen::VectorXd::Ones(m_users));
    const Eigen::MatrixXd coupling = (h.adjoint() * u).cwiseAbs2();

    auto sum_rate = [&](const Eigen::VectorXd& p) {
        const Eigen::VectorXd received = coupling * p + noise;
        double r = 0.0;
        for (Eigen::Index m = 0; m < m_users; ++m) {
            r += std::log2(received(m)) - std::log2(received(m) - p(m) * coupling(m, m));
        }
        return r;
    };
    auto gradient = [&](const Eigen::VectorXd& p) {
        const Eigen::VectorXd received = coupling * p + noise;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(m_users);
        for (Eigen::Index m = 0; m < m_users; ++m) {
            const double interference = received(m) - p(m) * coupling(m, m);
            for (Eigen::Index k = 0; k < m_users; ++k) {
                g(k) += coupling(m, k) / received(m);
                if (k != m) {
                    g(k) -= coupling(m, k) / interference;
                }
            }
        }
        return Eigen::VectorXd(g / std::log(2.0));
    };

    PowerOptResult result;
    result.powers = Eigen::VectorXd::Constant(m_users, p_tot / static_cast<double>(m_users));
    double value = sum_rate(result.powers);
    result.trace.push_back(value);
    if (p_tot <= 0.0) {
        return result;
    }
    double step = p_tot;
    for (int it = 0; it < steps; ++it) {
        const Eigen::VectorXd g = gradient(result.powers);
        const double g_norm = g.norm();
        if (!(g_norm > 0.0)) {
            break;
        }
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            const Eigen::VectorXd trial = project_to_simplex(result.powers + (step / g_norm) * g, p_tot);
            const double trial_value = sum_rate(trial);
            if (trial_value > value) {
                result.powers = trial;
                value = trial_value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        result.trace.push_back(value);
        step = std::min(2.0 * step, p_tot);
    }
    return result;
}

BeamformingMatrix mrt_optimized_power_beamformer(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                                                 int steps)
{
    return mrt_directions(h, mrt_power_optimization(h, p_tot, noise, steps).powers);
}

WmmseResult wmmse(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                  const BeamformingMatrix& initial, const WmmseOptions& options)
{
    check_dims(h, noise);
    if (initial.rows() != h.rows() || initial.cols() != h.cols()) {
        throw DomainError("wmmse: initial precoder has wrong dimensions");
    }
    const double init_power = total_power(initial);
    if (!(init_power > 0.0)) {
        throw DomainError("wmmse: zero initial precoder is a fixed point and is rejected");
    }
    const auto n = h.rows();
    const auto m_users = h.cols();

    WmmseResult result;
    result.w = initial;
    if (init_power > p_tot) {
        result.w *= std::sqrt(p_tot / init_power);
    }
    double value = sum_rate_of(h, result.w, noise);
    result.trace.push_back(value);

    for (int it = 0; it < options.max_iters; ++it) {
        const CMatrix g = h.adjoint() * result.w;
        Eigen::VectorXcd u(m_users);
        Eigen::VectorXd weight(m_users);
        for (Eigen::Index m = 0; m < m_users; ++m) {
            const double received = g.row(m).cwiseAbs2().sum() + noise(m);
            u(m) = g(m, m) / received;
            const double mse = 1.0 - std::norm(g(m, m)) / received;
            weight(m) = 1.0 / std::max(mse, std::numeric_limits<double>::min());
        }
        CMatrix a = CMatrix::Zero(n, n);
        CMatrix b(n, m_users);
        for (Eigen::Index m = 0; m < m_users; ++m) {
            a.noalias() += (weight(m) * std::norm(u(m))) * h.col(m) * h.col(m).adjoint();
            b.col(m) = (weight(m) * u(m)) * h.col(m);
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
        const Eigen::VectorXd lam = eig.eigenvalues();
        const CMatrix c = eig.eigenvectors().adjoint() * b;
        const Eigen::VectorXd c_row = c.rowwise().squaredNorm();
        const double lam_floor = 1e-12 * std::max(lam.maxCoeff(), 0.0);

        auto power_at = [&](double mu) {
            double p = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double d = lam(i) + mu;
                if (mu == 0.0 && lam(i) <= lam_floor) {
                    continue;
                }
                p += c_row(i) / (d * d);
            }
            return p;
        };
        double mu = 0.0;
        if (power_at(0.0) > p_tot) {
            double lo = 0.0;
            double hi = std::sqrt(c_row.sum() / p_tot) + 1e-300;
            while (power_at(hi) > p_tot) {
                hi *= 2.0;
            }
            for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
                const double mid = 0.5 * (lo + hi);
                (power_at(mid) > p_tot ? lo : hi) = mid;
            }
            mu = hi;
        }
        Eigen::VectorXd inv(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            inv(i) = (mu == 0.0 && lam(i) <= lam_floor) ? 0.0 : 1.0 / (lam(i) + mu);
        }
        BeamformingMatrix next = eig.eigenvectors() * (inv.asDiagonal() * c);
        const double next_power = total_power(next);
        if (next_power > p_tot) {
            next *= std::sqrt(p_tot / next_power);
        }
        const double next_value = sum_rate_of(h, next, noise);
        ++result.iterations;
        if (!(next_value >= value)) {
            // Rounding-level regression: keep the previous iterate.
            break;
        }
        const double gain = next_value - value;
        result.w = std::move(next);
        value = next_value;
        result.trace.push_back(value);
        if (gain <= options.rel_tol * std::max(std::abs(value), 1e-300)) {
            break;
        }
    }
    return result;
}

WmmseResult wmmse_baseline(const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise,
                           const WmmseOptions& options)
{
    if (!(p_tot > 0.0)) {
        WmmseResult zero;
        zero.w = BeamformingMatrix::Zero(h.rows(), h.cols());
        zero.trace.push_back(0.0);
        return zero;
    }
    WmmseResult best = wmmse(h, p_tot, noise, mrt_beamformer(h, p_tot), options);
    if (h.rows() > h.cols()) {
        try {
            WmmseResult from_zf = wmmse(h, p_tot, noise, zf_beamformer(h, p_tot), options);
            if (from_zf.trace.back() > best.trace.back()) {
                best = std::move(from_zf);
            }
        } catch (const RankError&) {
            // MRT start only.
        }
    }
    return best;
}

} // namespace mats
