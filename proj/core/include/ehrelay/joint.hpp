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

#include <optional>
#include <vector>

#include "ehrelay/channel.hpp"
#include "ehrelay/split_kernel.hpp"

namespace ehrelay
{

// Joint design of the source powers q, the relay allocations
// d_k = f_k ((1-eps) alpha_k q_k + s1^2) and the power-splitting ratio.

struct JointProblem
{
    Vec alpha;
    Vec beta;
    double p_source = 0.0;
    double sigma1_sq = 1.0;
    double sigma2_sq = 1.0;
    double eta = 0.0;

    void validate() const;

    static JointProblem from(const EigenSystem& eig, const SystemParams& params);
};

enum class DualGrowth
{
    geometric, ///< bracket offset 1e-4 * 2^j
    additive,  ///< bracket offset 1e-4 * (j + 1)
};

struct JointOptions
{
    /// Search used by the relay subproblem (d, eps at fixed q).
    SplitOptions split;
    /// Absolute capacity change per outer iteration that ends the alternation.
    double threshold = 1e-3;
    int max_outer = 500;
    DualGrowth growth = DualGrowth::geometric;
    int max_expansions = 200;
    /// Bracket width on nu1, relative to the upper end, that ends the
    /// source-power bisection.
    double dual_rel_tol = 1e-14;
    /// After each source update, re-optimize q and d together at the
    /// current eps. Without it the alternation can stop at points where
    /// neither block alone can improve.
    bool coupled_refinement = true;
    int refinement_iterations = 200;
};

struct JointSolution
{
    Vec q;
    Vec d;
    double eps = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    /// Relay water-filling dual; 1/nu2 when nu2 > 0.
    double mu = 0.0;
    double capacity = 0.0;
    bool converged = false;
    int iterations = 0;
    /// Capacity after each outer iteration, starting with the first relay
    /// solve at the uniform source.
    std::vector<double> history;
};

double scalar_rate_joint(const Vec& q, const Vec& d, double eps, const JointProblem& prob);

Vec optimal_d(double mu, double eps, const Vec& q, const JointProblem& prob);

double dual_function_joint(double mu, double eps, const Vec& q, const JointProblem& prob);

double dual_root_joint(double eps, const Vec& q, const JointProblem& prob, double tol);

/// sum(d) / (eta sum(alpha q)), clamped to [0, 1].
double eps_update_joint(const Vec& d, const Vec& q, const JointProblem& prob);

struct RelayStep
{
    Vec d;
    double eps = 0.0;
    double mu = 0.0;
    double capacity = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Best (d, eps) for a fixed source allocation.
RelayStep subproblem_a(const Vec& q, const JointProblem& prob, const SplitOptions& opts = {});

/// Source powers at duals (nu1, nu2). Empty when 2 (nu1 - nu2 eps eta
/// alpha_k) <= 0 for some mode, i.e. the Lagrangian is unbounded in q_k.
std::optional<Vec> optimal_q(double nu1, double nu2, double eps, const Vec& d,
                             const JointProblem& prob);

/// Per-mode activation level phi_k: q_k > 0 iff nu1 - nu2 eps eta alpha_k < phi_k.
Vec activation_levels(double eps, const Vec& d, const JointProblem& prob);

struct DualDecompositionResult
{
    Vec q;
    double nu1 = 0.0;
    double nu2 = 0.0;
    bool feasible = false;
};

/// Source powers for fixed (d, eps): bisection on nu1 for sum(q) = P with an
/// inner bisection on nu2 for eps eta sum(alpha q) = sum(d).
DualDecompositionResult dual_decomposition_q(const Vec& d, double eps, const JointProblem& prob,
                                             const JointOptions& opts = {});

struct CoupledStep
{
    Vec q;
    Vec d;
    double nu1 = 0.0;
    double nu2 = 0.0;
    double capacity = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Maximizes the rate over (q, d) at fixed eps with sum(q) = P and
/// sum(d) = eps eta sum(alpha q). Active-set Newton iteration in the null
/// space of the two constraints, starting from the given point after
/// scaling it onto both constraints.
CoupledStep coupled_refinement(const Vec& q, const Vec& d, double eps, const JointProblem& prob,
                               int max_iterations = 200);

JointSolution solve_joint(const JointProblem& prob, const JointOptions& opts = {});

/// P - sum(q).
double source_slack(const Vec& q, const JointProblem& prob);

/// eps eta sum(alpha q) - sum(d).
double harvest_slack(const Vec& q, const Vec& d, double eps, const JointProblem& prob);

/// Worst relative mismatch of the relay stationarity condition
/// d rate / d d_k = 1/mu over modes with q_k, d_k > 0.
double relay_stationarity_residual(const Vec& q, const Vec& d, double eps, double mu,
                                   const JointProblem& prob);

/// Worst relative mismatch of d rate / d q_k = nu1 - nu2 eps eta alpha_k
/// over modes with q_k, d_k > 0.
double source_stationarity_residual(const Vec& q, const Vec& d, double eps, double nu1,
                                    double nu2, const JointProblem& prob);

struct JointMatrices
{
    CMat q; ///< source covariance V1_D diag(q) V1_D^H
    CMat f; ///< relay matrix V2_D diag(sqrt(f_k)) U1_D^H
};

JointMatrices build_joint_matrices(const JointSolution& sol, const EigenSystem& eig,
                                   const JointProblem& prob);

} // namespace ehrelay
