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
#include "mats/beamforming.hpp"
#include "mats/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

namespace mats {

namespace {

Eigen::VectorXd noise_vector(std::span<const UserStats> users)
{
    Eigen::VectorXd noise(static_cast<Eigen::Index>(users.size()));
    for (std::size_t m = 0; m < users.size(); ++m) {
        noise(static_cast<Eigen::Index>(m)) = users[m].noise_power;
    }
    return noise;
}

BeamformingMatrix make_precoder(Beamformer kind, const ChannelMatrix& h, double p_tot, const Eigen::VectorXd& noise)
{
    switch (kind) {
    case Beamformer::mrt:
        return mrt_beamformer(h, p_tot);
    case Beamformer::zf:
        return zf_beamformer(h, p_tot);
    case Beamformer::zf_waterfilling:
        return zf_waterfilling_beamformer(h, p_tot, noise);
    case Beamformer::mrt_power_opt:
        return mrt_optimized_power_beamformer(h, p_tot, noise);
    case Beamformer::wmmse:
        return wmmse_baseline(h, p_tot, noise).w;
    }
    throw DomainError("unknown beamformer");
}

// Running mean / second central moment, merged with Chan's formula.
struct Moments {
    long long count = 0;
    Eigen::VectorXd mean;
    Eigen::VectorXd m2;

    explicit Moments(Eigen::Index dim) : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

    void add(const Eigen::VectorXd& x)
    {
        ++count;
        const Eigen::VectorXd delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta.cwiseProduct(x - mean);
    }

    void merge(const Moments& other)
    {
        if (other.count == 0) {
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double n = na + nb;
        const Eigen::VectorXd delta = other.mean - mean;
        mean += delta * (nb / n);
        m2 += other.m2 + delta.cwiseAbs2() * (na * nb / n);
        count += other.count;
    }
};

} // namespace

double mrt_signal_moment(const UserStats& user, int n_antennas)
{
    const double n = n_antennas;
    const double k = user.kappa;
    return user.beta * user.beta * ((2.0 * n * k + n) / ((k + 1.0) * (k + 1.0)) + n * n);
}

double mrt_interference_moment(const UserStats& user_m, const UserStats& user_j, double cross_los, int n_antennas)
{
    const double km = user_m.kappa;
    const double kj = user_j.kappa;
    return user_m.beta * user_j.beta * (km * kj * cross_los + n_antennas * (km + kj + 1.0)) /
           ((km + 1.0) * (kj + 1.0));
}

ErgodicReport mrt_ergodic_approx(const AntennaLayout& layout, std::span<const UserStats> users,
                                 const SystemConfig& cfg)
{
    const int n = layout.size();
    const auto m_users = static_cast<Eigen::Index>(users.size());
    ErgodicReport report;
    report.kind = ErgodicKind::mrt_approx;
    report.per_user = Eigen::VectorXd::Zero(m_users);
    if (cfg.p_tot <= 0.0) {
        return report;
    }
    const CMatrix hbar = los_matrix(layout, users, cfg.wavelength);
    // |hbar_j^H hbar_m|^2 for every pair.
    const Eigen::MatrixXd cross = (hbar.adjoint() * hbar).cwiseAbs2();
    double beta_sum = 0.0;
    for (const auto& u : users) {
        beta_sum += u.beta;
    }
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const auto& um = users[static_cast<std::size_t>(m)];
        double denom = um.noise_power / cfg.p_tot * n * beta_sum;
        for (Eigen::Index j = 0; j < m_users; ++j) {
            if (j != m) {
                denom += mrt_interference_moment(um, users[static_cast<std::size_t>(j)], cross(j, m), n);
            }
        }
        report.per_user(m) = std::log2(1.0 + mrt_signal_moment(um, n) / denom);
    }
    report.sum = report.per_user.sum();
    return report;
}

ZfStatsCache zf_sigma(const AntennaLayout& layout, std::span<const UserStats> users, double wavelength)
{
    const auto m_users = static_cast<Eigen::Index>(users.size());
    ZfStatsCache cache;
    cache.omega.resize(m_users);
    cache.lambda1.resize(m_users);
    cache.lambda2.resize(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const double k = users[static_cast<std::size_t>(m)].kappa;
        cache.omega(m) = k;
        cache.lambda1(m) = 1.0 / (k + 1.0);
        cache.lambda2(m) = std::sqrt(k / (k + 1.0));
    }
    cache.hbar = los_matrix(layout, users, wavelength);
    const double n = layout.size();
    const CMatrix lhs = cache.lambda2.asDiagonal() * (cache.hbar.adjoint() * cache.hbar) * cache.lambda2.asDiagonal();
    cache.sigma = lhs / n;
    cache.sigma.diagonal() += cache.lambda1.cast<cdouble>();
    return cache;
}

ErgodicReport zf_ergodic_lower_bound(const AntennaLayout& layout, std::span<const UserStats> users,
                                     const SystemConfig& cfg)
{
    const int n = layout.size();
    const auto m_users = static_cast<Eigen::Index>(users.size());
    if (n <= m_users) {
        throw RankError("zf_ergodic_lower_bound: requires N > M");
    }
    const ZfStatsCache cache = zf_sigma(layout, users, cfg.wavelength);
    Eigen::LLT<CMatrix> llt(cache.sigma);
    if (llt.info() != Eigen::Success) {
        throw NumericalRankError("zf_ergodic_lower_bound: Sigma is not positive definite", 0.0);
    }
    const CMatrix sigma_inv = llt.solve(CMatrix::Identity(m_users, m_users));
    ErgodicReport report;
    report.kind = ErgodicKind::zf_lower_bound;
    report.per_user.resize(m_users);
    const double p = cfg.p_tot / static_cast<double>(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const auto& u = users[static_cast<std::size_t>(m)];
        const double snr = p / u.noise_power * u.beta * (n - m_users) / sigma_inv(m, m).real();
        report.per_user(m) = std::log2(1.0 + snr);
    }
    report.sum = report.per_user.sum();
    return report;
}

std::string_view to_string(Beamformer b)
{
    switch (b) {
    case Beamformer::mrt:
        return "mrt";
    case Beamformer::zf:
        return "zf";
    case Beamformer::zf_waterfilling:
        return "zf_waterfilling";
    case Beamformer::mrt_power_opt:
        return "mrt_power_opt";
    case Beamformer::wmmse:
        return "wmmse";
    }
    return "?";
}

Beamformer beamformer_from_string(std::string_view name)
{
    for (auto b : {Beamformer::mrt, Beamformer::zf, Beamformer::zf_waterfilling, Beamformer::mrt_power_opt,
                   Beamformer::wmmse}) {
        if (to_string(b) == name) {
            return b;
        }
    }
    throw DomainError("unknown beamformer '" + std::string(name) + "'");
}

ErgodicReport mc_ergodic_rate(const AntennaLayout& layout, std::span<const UserStats> users,
                              const SystemConfig& cfg, Beamformer beamformer, const McOptions& options)
{
    if (options.n_samples < 100) {
        throw DomainError("mc_ergodic_rate: at least 100 samples are required");
    }
    const RicianChannel channel(layout, users, cfg.wavelength);
    const Eigen::VectorXd noise = noise_vector(users);
    const auto m_users = static_cast<Eigen::Index>(users.size());
    const long long chunk = std::max(1LL, options.chunk);
    const long long n_chunks = (options.n_samples + chunk - 1) / chunk;

    // Per chunk: moments of [per-user rates..., sum rate].
    std::vector<Moments> partial(static_cast<std::size_t>(n_chunks), Moments(m_users + 1));
    std::vector<long long> redraws(static_cast<std::size_t>(n_chunks), 0);
    std::atomic<long long> next{0};

    auto worker = [&] {
        ChannelMatrix h;
        Eigen::VectorXd sample(m_users + 1);
        for (long long c = next++; c < n_chunks; c = next++) {
            Rng rng = make_stream(options.seed, static_cast<std::uint64_t>(c));
            const long long count = std::min(chunk, options.n_samples - c * chunk);
            auto& acc = partial[static_cast<std::size_t>(c)];
            for (long long s = 0; s < count; ++s) {
                for (int attempt = 0;; ++attempt) {
                    channel.sample_into(rng, h);
                    try {
                        const auto w = make_precoder(beamformer, h, cfg.p_tot, noise);
                        const auto report = rate_report(h, w, noise);
                        sample.head(m_users) = report.per_user_rate;
                        sample(m_users) = report.sum_rate;
                        break;
                    } catch (const RankError&) {
                        ++redraws[static_cast<std::size_t>(c)];
                        if (attempt > 1000) {
                            throw;
                        }
                    }
                }
                acc.add(sample);
            }
        }
    };

    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_chunks)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    worker();
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                    next = n_chunks;
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    // Pairwise (tree) reduction in chunk order.
    std::size_t width = partial.size();
    while (width > 1) {
        const std::size_t half = (width + 1) / 2;
        for (std::size_t i = 0; i + half < width; ++i) {
            partial[i].merge(partial[i + half]);
        }
        width = half;
    }
    const Moments& total = partial.front();
    const double n = static_cast<double>(total.count);
    const Eigen::VectorXd std_err = (total.m2 / (n - 1.0)).cwiseMax(0.0).cwiseSqrt() / std::sqrt(n);

    ErgodicReport report;
    report.kind = ErgodicKind::monte_carlo;
    report.per_user = total.mean.head(m_users);
    report.sum = report.per_user.sum();
    report.mc_std_err = std_err.head(m_users);
    report.sum_std_err = std_err(m_users);
    report.samples = total.count;
    for (auto r : redraws) {
        report.resamples += r;
    }
    return report;
}

} // namespace mats
