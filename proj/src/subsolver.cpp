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

#include "mats/subsolver.hpp"
#include "mats/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mats {

namespace {

constexpr double kArmijo = 0.25;

std::vector<HalfPlane> all_constraints(const Box& box, const std::vector<HalfPlane>& halfplanes)
{
    std::vector<HalfPlane> c;
    c.reserve(halfplanes.size() + 4);
    c.push_back({Vec2(1.0, 0.0), box.x_lo});
    c.push_back({Vec2(-1.0, 0.0), -box.x_hi});
    c.push_back({Vec2(0.0, 1.0), box.y_lo});
    c.push_back({Vec2(0.0, -1.0), -box.y_hi});
    for (const auto& h : halfplanes) {
        if (h.normal.squaredNorm() > 0.0) {
            c.push_back(h);
        } else if (h.offset > 0.0) {
            // 0 >= offset > 0 can never hold; keep it so projection reports infeasibility.
            c.push_back(h);
        }
    }
    return c;
}

double feas_tol(const HalfPlane& h, const Vec2& x)
{
    return 1e-14 * (1.0 + std::abs(h.offset) + h.normal.norm() * (1.0 + x.norm()));
}

bool satisfies_all(const std::vector<HalfPlane>& cons, const Vec2& x)
{
    for (const auto& h : cons) {
        if (h.slack(x) < -feas_tol(h, x)) {
            return false;
        }
    }
    return true;
}

// Pushes x inward along violated normals until every slack is nonnegative,
// starting from the exact correction and widening the margin as needed.
Vec2 polish(const std::vector<HalfPlane>& cons, Vec2 x)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (int pass = 0; pass < 8; ++pass) {
        bool clean = true;
        for (const auto& h : cons) {
            const double s = h.slack(x);
            const double nn = h.normal.squaredNorm();
            if (s < 0.0 && nn > 0.0) {
                clean = false;
                const double margin = pass * eps * (std::abs(h.offset) + h.normal.norm() * x.norm());
                x += (-s + margin) / nn * h.normal;
            }
        }
        if (clean) {
            break;
        }
    }
    return x;
}

double rounding_of(double f)
{
    return 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));
}

// Maximizes along the single active edge at x by bisection on the
// tangential derivative. Returns false when x is not on exactly one edge
// or no ascent is available along it.
bool edge_search(const Subproblem2D& sub, const std::vector<HalfPlane>& cons, Vec2& x, double& f, Vec2& g)
{
    const HalfPlane* active = nullptr;
    for (const auto& h : cons) {
        if (h.slack(x) <= feas_tol(h, x) * 100.0) {
            if (active) {
                return false;
            }
            active = &h;
        }
    }
    if (!active || active->normal.squaredNorm() == 0.0) {
        return false;
    }
    Vec2 tau(-active->normal.y(), active->normal.x());
    tau.normalize();
    if (g.dot(tau) < 0.0) {
        tau = -tau;
    }
    if (!(g.dot(tau) > 0.0)) {
        return false;
    }
    double u_max = std::numeric_limits<double>::infinity();
    for (const auto& h : cons) {
        if (&h == active) {
            continue;
        }
        const double rate = h.normal.dot(tau);
        if (rate < 0.0) {
            u_max = std::min(u_max, std::max(0.0, h.slack(x)) / -rate);
        }
    }
    if (!(u_max > 0.0) || !std::isfinite(u_max)) {
        return false;
    }
    double lo = 0.0;
    double hi = u_max;
    Vec2 gh;
    const double fh = sub.objective(x + hi * tau, &gh);
    if (!(std::isfinite(fh) && gh.allFinite() && gh.dot(tau) > 0.0)) {
        for (int i = 0; i < 200 && hi - lo > std::numeric_limits<double>::epsilon() * (1.0 + x.norm()); ++i) {
            const double mid = 0.5 * (lo + hi);
            Vec2 gm;
            const double fm = sub.objective(x + mid * tau, &gm);
            if (std::isfinite(fm) && gm.allFinite() && gm.dot(tau) > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        lo = hi;
    }
    if (lo == 0.0) {
        return false;
    }
    const Vec2 xn = polish(cons, x + lo * tau);
    Vec2 gn;
    const double fn = sub.objective(xn, &gn);
    const double rounding = rounding_of(f);
    if (!std::isfinite(fn) || !gn.allFinite() || fn < f - rounding || (xn - x).squaredNorm() == 0.0) {
        return false;
    }
    x = xn;
    f = fn;
    g = gn;
    return true;
}

} // namespace

bool Subproblem2D::is_feasible(const Vec2& x, double tol) const
{
    if (!box.contains(x, tol)) {
        return false;
    }
    for (const auto& h : halfplanes) {
        if (h.slack(x) < -tol * (1.0 + h.normal.norm())) {
            return false;
        }
    }
    return true;
}

std::vector<HalfPlane> linearize_distance_constraints(const AntennaLayout& layout, int n, double d_min)
{
    const Vec2& tl = layout.positions.at(static_cast<std::size_t>(n));
    std::vector<HalfPlane> out;
    out.reserve(layout.positions.size());
    for (int i = 0; i < layout.size(); ++i) {
        if (i == n) {
            continue;
        }
        const Vec2 d = tl - layout.positions[static_cast<std::size_t>(i)];
        // ||d||^2 + 2 d^T (t - tl) >= d_min^2  <=>  (2d)^T t >= d_min^2 - ||d||^2 + 2 d^T tl
        out.push_back({2.0 * d, d_min * d_min - d.squaredNorm() + 2.0 * d.dot(tl)});
    }
    return out;
}

bool project_onto_polygon(const Vec2& y, const Box& box, const std::vector<HalfPlane>& halfplanes, Vec2& out)
{
    const auto cons = all_constraints(box, halfplanes);
    if (std::all_of(cons.begin(), cons.end(), [&](const HalfPlane& h) { return h.slack(y) >= 0.0; })) {
        out = y;
        return true;
    }
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    auto consider = [&](const Vec2& raw) {
        const Vec2 x = polish(cons, raw);
        const double d = (x - y).squaredNorm();
        if (d < best && satisfies_all(cons, x)) {
            best = d;
            out = x;
            found = true;
        }
    };
    for (const auto& h : cons) {
        const double nn = h.normal.squaredNorm();
        if (nn > 0.0) {
            consider(y + (h.offset - h.normal.dot(y)) / nn * h.normal);
        }
    }
    for (std::size_t a = 0; a < cons.size(); ++a) {
        for (std::size_t b = a + 1; b < cons.size(); ++b) {
            const Vec2& na = cons[a].normal;
            const Vec2& nb = cons[b].normal;
            const double det = na.x() * nb.y() - na.y() * nb.x();
            if (std::abs(det) <= 1e-14 * na.norm() * nb.norm()) {
                continue;
            }
            const Vec2 x((cons[a].offset * nb.y() - na.y() * cons[b].offset) / det,
                         (na.x() * cons[b].offset - cons[a].offset * nb.x()) / det);
            consider(x);
        }
    }
    return found;
}

SubsolverResult maximize(const Subproblem2D& sub, const SubsolverOptions& options)
{
    if (!sub.is_feasible(sub.start, 1e-9)) {
        throw DomainError("maximize: start point is infeasible");
    }
    SubsolverResult result;
    Vec2 x = sub.start;
    Vec2 g;
    double f = sub.objective(x, &g);
    if (!std::isfinite(f) || !g.allFinite()) {
        throw DomainError("maximize: objective is not finite at the start point");
    }
    result.start_value = f;

    auto project = [&](const Vec2& y) {
        Vec2 p;
        if (!project_onto_polygon(y, sub.box, sub.halfplanes, p)) {
            throw DomainError("maximize: feasible set is empty");
        }
        return p;
    };

    const auto cons = all_constraints(sub.box, sub.halfplanes);
    int it = 0;
    for (; it < options.max_iters; ++it) {
        const Vec2 pg = x - project(x + g);
        result.stationarity = pg.norm();
        if (result.stationarity <= options.tol) {
            result.converged = true;
            break;
        }
        bool accepted = false;
        double step = 1.0;
        for (int halving = 0; halving < 80; ++halving, step *= 0.5) {
            const Vec2 xn = project(x + step * g);
            if ((xn - x).squaredNorm() == 0.0) {
                break;
            }
            Vec2 gn;
            const double fn = sub.objective(xn, &gn);
            if (!std::isfinite(fn) || !gn.allFinite()) {
                result.left_domain = true;
                continue;
            }
            const double slope = g.dot(xn - x);
            if (!(slope > 0.0)) {
                continue;
            }
            // Second test: for a concave objective, a nonnegative directional
            // derivative at xn certifies ascent on the whole segment. It takes
            // over once the gain drops below the rounding of f.
            const bool armijo = fn >= f + kArmijo * slope && fn > f;
            const double rounding = rounding_of(f);
            const bool certified = gn.dot(xn - x) >= 0.0 && fn >= f - rounding;
            if (armijo || certified) {
                x = xn;
                f = fn;
                g = gn;
                accepted = true;
                break;
            }
        }
        if (!accepted && !edge_search(sub, cons, x, f, g)) {
            // No representable ascent step left along the projection arc.
            break;
        }
    }
    result.iterations = it;
    result.point = x;
    result.value = f;
    return result;
}

bool spot_check_concavity(const Subproblem2D& sub, Rng& rng, int segments, double tol)
{
    std::uniform_real_distribution<double> ux(sub.box.x_lo, sub.box.x_hi);
    std::uniform_real_distribution<double> uy(sub.box.y_lo, sub.box.y_hi);
    for (int s = 0; s < segments; ++s) {
        const Vec2 a(ux(rng), uy(rng));
        const Vec2 b(ux(rng), uy(rng));
        const double fa = sub.objective(a, nullptr);
        const double fb = sub.objective(b, nullptr);
        if (!std::isfinite(fa) || !std::isfinite(fb)) {
            continue;
        }
        const double fm = sub.objective(0.5 * (a + b), nullptr);
        if (fm < 0.5 * (fa + fb) - tol * (1.0 + std::abs(fm))) {
            return false;
        }
    }
    return true;
}

} // namespace mats
