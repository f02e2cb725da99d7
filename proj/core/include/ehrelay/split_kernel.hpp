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

#pragma once

#include <Eigen/Dense>

namespace ehrelay
{

using Vec = Eigen::VectorXd;

enum class SplitSearch
{
    /// Grid walk over eps from `sweep_start` in steps of `sweep_step`,
    /// stopping at the first point whose update lands within `threshold`.
    sweep,
    /// Damped fixed-point iteration eps <- eps + damping (eps* - eps).
    fixed_point,
};

struct SplitOptions
{
    SplitSearch mode = SplitSearch::fixed_point;
    double threshold = 1e-3;
    int max_iterations = 1000;
    double damping = 0.5;
    double initial_eps = 0.5;
    double sweep_start = 1e-3;
    double sweep_step = 1e-3;
    /// Target |l(mu)| of the inner root search.
    double dual_tolerance = 1e-10;
};

namespace kernel
{

/// Parallel eigenmodes feeding a power-splitting amplify-and-forward relay.
///
/// Mode k sees first-hop SNR (1-eps) * first_gain[k]; a relay allocation
/// a_k on the mode yields second-hop SNR second_gain[k] * a_k. The relay
/// may spend at most eps * budget_coeff in total.
///
/// With a uniform source this is the fixed-covariance problem (allocation
/// x, gains rho1 alpha and beta, budget eta rho2 sum(alpha)). With a fixed
/// source allocation q it is the relay subproblem of the joint design
/// (allocation d, gains alpha q / s1^2 and beta / s2^2, budget
/// eta sum(alpha q)).
struct ModeSet
{
    Vec first_gain;
    Vec second_gain;
    double budget_coeff = 0.0;

    Eigen::Index size() const { return first_gain.size(); }
};

/// Water-filling level of each mode for dual mu = 1/nu; zero below the
/// activation threshold (ties resolve to zero).
void allocation(double mu, double eps, const ModeSet& modes, Eigen::Ref<Vec> out);
Vec allocation(double mu, double eps, const ModeSet& modes);

/// Smallest per-mode activation threshold 2 ln2 (1+s)/(s g); +inf when no
/// mode can carry power.
double activation_floor(double eps, const ModeSet& modes);

/// Derivative of the Lagrangian in eps, as a function of mu, with the
/// allocation eliminated.
double dual_function(double mu, double eps, const ModeSet& modes);

/// Root of dual_function by bisection. The bracket starts at the
/// activation floor and grows by doubling (at most 200 times).
double dual_root(double eps, const ModeSet& modes, double tol);

/// Power-splitting ratio that makes the harvest budget exactly cover
/// `alloc`, clamped to [0, 1].
double split_update(const Vec& alloc, const ModeSet& modes);

/// Rate 1/2 sum log2((1+s)(1+g a)/(1+s+g a)) in bits per channel use.
double rate(const Vec& alloc, double eps, const ModeSet& modes);

struct Allocation
{
    Vec alloc;
    double mu = 0.0;
};

/// Allocation that spends the budget eps * budget_coeff exactly, together
/// with the multiplier that produces it.
Allocation fill_budget(double eps, const ModeSet& modes);

/// Worst relative mismatch |d rate / d a_k * mu - 1| over modes with a_k > 0.
double stationarity_residual(const Vec& alloc, double eps, double mu, const ModeSet& modes);

struct SplitResult
{
    Vec alloc;
    double eps = 0.0;
    double mu = 0.0;
    double capacity = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Alternates the dual root search and the eps update until the update is
/// self-consistent, then re-fills the budget at the reported eps.
SplitResult solve(const ModeSet& modes, const SplitOptions& opts);

bool degenerate(const ModeSet& modes);

} // namespace kernel
} // namespace ehrelay
