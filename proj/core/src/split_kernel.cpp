// SPDX-License-Identifier: Apache-2.0
//
// ehrelay: capacity optimization for power-splitting MIMO relays
// Copyright (C) 2026 The ehrelay Authors
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

#include "ehrelay/split_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehrelay/errors.hpp"

namespace ehrelay::kernel
{

namespace
{

constexpr double kLn2 = std::numbers::ln2;
constexpr int kMaxDoublings = 200;
constexpr int kMaxBisections = 400;

bool active_mode(double s, double g) { return s > 0.0 && g > 0.0; }

double allocation_one(double mu, double s, double g)
{
    if (!active_mode(s, g) || !(mu > 0.0))
        return 0.0;
    // sqrt(s^2 + c) - s written without cancellation.
    const double c = (2.0 / kLn2) * s * g * mu;
    const double level = c / (std::sqrt(s * s + c) + s) - 2.0;
    return level > 0.0 ? level / (2.0 * g) : 0.0;
}

// Bisect until the bracket stops shrinking in floating point.
bool collapsed(double lo, double hi)
{
    return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi);
}

} // namespace

bool degenerate(const ModeSet& modes)
{
    if (!(modes.budget_coeff > 0.0))
        return true;
    for (Eigen::Index k = 0; k < modes.size(); ++k)
        if (active_mode(modes.first_gain[k], modes.second_gain[k]))
            return false;
    return true;
}

void allocation(double mu, double eps, const ModeSet& modes, Eigen::Ref<Vec> out)
{
    for (Eigen::Index k = 0; k < modes.size(); ++k)
        out[k] = allocation_one(mu, (1.0 - eps) * modes.first_gain[k], modes.second_gain[k]);
}

Vec allocation(double mu, double eps, const ModeSet& modes)
{
    Vec out(modes.size());
    allocation(mu, eps, modes, out);
    return out;
}

double activation_floor(double eps, const ModeSet& modes)
{
    double floor = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        const double s = (1.0 - eps) * modes.first_gain[k];
        const double g = modes.second_gain[k];
        if (active_mode(s, g))
            floor = std::min(floor, 2.0 * kLn2 * (1.0 + s) / (s * g));
    }
    return floor;
}

double dual_function(double mu, double eps, const ModeSet& modes)
{
    double sum = 0.0;
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        const double s = (1.0 - eps) * modes.first_gain[k];
        const double g = modes.second_gain[k];
        const double ga = g * allocation_one(mu, s, g);
        // 1/(1+s+ga) - 1/(1+s)
        sum -= modes.first_gain[k] * ga / ((1.0 + s) * (1.0 + s + ga));
    }
    return sum / (2.0 * kLn2) + modes.budget_coeff / mu;
}

double dual_root(double eps, const ModeSet& modes, double tol)
{
    if (degenerate(modes))
        throw DegenerateBudget("harvest budget is zero; the dual has no positive root");
    if (!(eps >= 0.0 && eps < 1.0))
        throw InputError("dual_root requires 0 <= eps < 1");

    double lo = activation_floor(eps, modes);
    double hi = 2.0 * lo;
    int doublings = 0;
    while (dual_function(hi, eps, modes) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxDoublings || !std::isfinite(hi))
            throw BracketError("dual root: no sign change after 200 doublings");
    }

    double best = hi;
    double best_abs = std::abs(dual_function(hi, eps, modes));
    for (int it = 0; it < kMaxBisections && best_abs > tol && !collapsed(lo, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double value = dual_function(mid, eps, modes);
        if (std::abs(value) < best_abs) {
            best = mid;
            best_abs = std::abs(value);
        }
        (value > 0.0 ? lo : hi) = mid;
    }
    return best;
}

double split_update(const Vec& alloc, const ModeSet& modes)
{
    if (!(modes.budget_coeff > 0.0))
        throw DegenerateBudget("harvest budget coefficient is zero");
    return std::clamp(alloc.sum() / modes.budget_coeff, 0.0, 1.0);
}

double rate(const Vec& alloc, double eps, const ModeSet& modes)
{
    double bits = 0.0;
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        const double s = (1.0 - eps) * modes.first_gain[k];
        const double ga = modes.second_gain[k] * alloc[k];
        // (1+s)(1+ga)/(1+s+ga) = 1 + s ga/(1+s+ga)
        bits += std::log1p(s * ga / (1.0 + s + ga));
    }
    return 0.5 * bits / kLn2;
}

Allocation fill_budget(double eps, const ModeSet& modes)
{
    Allocation out{Vec::Zero(modes.size()), 0.0};
    const double budget = eps * modes.budget_coeff;
    const double floor = activation_floor(eps, modes);
    if (!(budget > 0.0) || !std::isfinite(floor)) {
        out.mu = std::isfinite(floor) ? floor : 0.0;
        return out;
    }

    Vec trial(modes.size());
    auto spent = [&](double mu) {
        allocation(mu, eps, modes, trial);
        return trial.sum();
    };

    double lo = floor;
    double hi = 2.0 * floor;
    int doublings = 0;
    while (spent(hi) < budget) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxDoublings || !std::isfinite(hi))
            throw BracketError("budget fill: allocation never reaches the budget");
    }
    for (int it = 0; it < kMaxBisections && !collapsed(lo, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double used = spent(mid);
        if (used == budget) {
            lo = hi = mid;
            break;
        }
        (used < budget ? lo : hi) = mid;
    }
    out.mu = hi;
    allocation(hi, eps, modes, out.alloc);
    return out;
}

double stationarity_residual(const Vec& alloc, double eps, double mu, const ModeSet& modes)
{
    double worst = 0.0;
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        if (!(alloc[k] > 0.0))
            continue;
        const double s = (1.0 - eps) * modes.first_gain[k];
        const double g = modes.second_gain[k];
        const double ga = g * alloc[k];
        // g/(1+ga) - g/(1+s+ga), in nats per unit allocation, over 2 ln2
        const double slope = g * s / ((1.0 + ga) * (1.0 + s + ga)) / (2.0 * kLn2);
        worst = std::max(worst, std::abs(slope * mu - 1.0));
    }
    return worst;
}

namespace
{

struct UpdateStep
{
    double eps_star;
    double mu;
};

UpdateStep update_at(double eps, const ModeSet& modes, double tol, Vec& scratch)
{
    const double mu = dual_root(eps, modes, tol);
    allocation(mu, eps, modes, scratch);
    return {split_update(scratch, modes), mu};
}

SplitResult finish(double eps, bool converged, int iterations, const ModeSet& modes)
{
    SplitResult out;
    out.converged = converged;
    out.iterations = iterations;
    out.eps = std::clamp(eps, 0.0, 1.0);
    if (out.eps >= 1.0) {
        out.alloc = Vec::Zero(modes.size());
        return out;
    }
    auto filled = fill_budget(out.eps, modes);
    out.alloc = std::move(filled.alloc);
    out.mu = filled.mu;
    out.capacity = rate(out.alloc, out.eps, modes);
    return out;
}

SplitResult solve_sweep(const ModeSet& modes, const SplitOptions& opts)
{
    Vec scratch(modes.size());
    double best_eps = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    double prev_gap = 0.0;
    int it = 0;
    for (;; ++it) {
        const double eps = opts.sweep_start + it * opts.sweep_step;
        if (eps >= 1.0 || it >= opts.max_iterations)
            break;
        const auto step = update_at(eps, modes, opts.dual_tolerance, scratch);
        const double gap = step.eps_star - eps;
        if (std::abs(gap) < best_gap) {
            best_gap = std::abs(gap);
            best_eps = step.eps_star;
        }
        if (std::abs(gap) < opts.threshold)
            return finish(step.eps_star, true, it + 1, modes);
        // The update crossed eps between two grid points without landing
        // inside the threshold: the fixed point lies within one step. On a
        // steep map eps* of either grid point can sit several steps away,
        // so report the secant root of the gap instead.
        if (it > 0 && prev_gap > 0.0 && gap < 0.0) {
            const double eps_final = eps - opts.sweep_step * gap / (gap - prev_gap);
            return finish(eps_final, true, it + 1, modes);
        }
        prev_gap = gap;
    }
    return finish(best_eps, false, it, modes);
}

SplitResult solve_fixed_point(const ModeSet& modes, const SplitOptions& opts)
{
    Vec scratch(modes.size());
    double eps = std::clamp(opts.initial_eps, 0.0, 1.0 - 1e-12);
    double best_eps = eps;
    double best_gap = std::numeric_limits<double>::infinity();
    // The gap eps* - eps is nonnegative at 0 and nonpositive at 1. Damped
    // steps oscillate when the map is steep, so keep a sign bracket and
    // bisect whenever a step leaves it or fails to halve the gap.
    double lo = 0.0;
    double hi = 1.0;
    double prev_gap = std::numeric_limits<double>::infinity();
    // A small gap moves to eps* undamped; eps* is reported only once its own
    // update also lands within the threshold, which matters on steep maps.
    bool candidate = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const auto step = update_at(eps, modes, opts.dual_tolerance, scratch);
        const double gap = step.eps_star - eps;
        if (std::abs(gap) < best_gap) {
            best_gap = std::abs(gap);
            best_eps = step.eps_star;
        }
        const bool small = std::abs(gap) <= opts.threshold;
        if (small && candidate)
            return finish(eps, true, it + 1, modes);
        if (gap > 0.0)
            lo = std::max(lo, eps);
        else if (gap < 0.0)
            hi = std::min(hi, eps);
        candidate = small && step.eps_star != eps;
        if (small && !candidate)
            return finish(eps, true, it + 1, modes);
        double next = step.eps_star;
        if (!candidate) {
            next = eps + opts.damping * gap;
            if (!(next > lo && next < hi) || std::abs(gap) > 0.5 * std::abs(prev_gap))
                next = 0.5 * (lo + hi);
        }
        prev_gap = gap;
        eps = next;
    }
    return finish(best_eps, false, opts.max_iterations, modes);
}

} // namespace

SplitResult solve(const ModeSet& modes, const SplitOptions& opts)
{
    if (!(opts.threshold > 0.0) || !(opts.damping > 0.0 && opts.damping <= 1.0) ||
        opts.max_iterations < 1 || !(opts.sweep_step > 0.0) || !(opts.dual_tolerance > 0.0))
        throw InputError("invalid split search options");

    if (degenerate(modes)) {
        SplitResult out;
        out.alloc = Vec::Zero(modes.size());
        out.converged = true;
        return out;
    }
    return opts.mode == SplitSearch::sweep ? solve_sweep(modes, opts)
                                           : solve_fixed_point(modes, opts);
}

} // namespace ehrelay::kernel
