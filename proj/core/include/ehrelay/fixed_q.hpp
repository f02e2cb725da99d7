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

#include "ehrelay/channel.hpp"
#include "ehrelay/split_kernel.hpp"

namespace ehrelay
{

// Uniform source covariance Q = (P/D) on the D strongest first-hop modes.
// The relay chooses its allocation x (the diagonal of X) and the
// power-splitting ratio eps.

struct FixedQProblem
{
    Vec alpha; ///< squared first-hop singular values
    Vec beta;  ///< squared second-hop singular values
    double rho1 = 0.0; ///< P / (D s1^2)
    double rho2 = 0.0; ///< P / (D s2^2)
    double eta = 0.0;

    /// Zero gains are accepted: such a mode never carries power.
    void validate() const;

    static FixedQProblem from(const EigenSystem& eig, const SystemParams& params);

    kernel::ModeSet modes() const;
};

struct FixedQSolution
{
    Vec x;
    double eps = 0.0;
    double mu = 0.0;
    double capacity = 0.0;
    bool converged = false;
    int iterations = 0;
};

double scalar_rate_fixed_q(const Vec& x, double eps, const FixedQProblem& prob);

/// Water-filling relay allocation at dual mu. Modes with beta = 0 get 0.
Vec optimal_x(double mu, double eps, const FixedQProblem& prob);

/// l(mu): derivative of the Lagrangian in eps with x eliminated.
double dual_function_fixed_q(double mu, double eps, const FixedQProblem& prob);

/// Throws DegenerateBudget when eta = 0 and BracketError if no sign change
/// is found.
double dual_root_fixed_q(double eps, const FixedQProblem& prob, double tol);

/// sum(x) / (eta rho2 sum(alpha)), clamped to [0, 1].
double eps_update_fixed_q(const Vec& x, const FixedQProblem& prob);

FixedQSolution solve_fixed_q(const FixedQProblem& prob, const SplitOptions& opts = {});

/// eta eps rho2 sum(alpha) - sum(x). Zero when the harvest constraint is tight.
double energy_slack_fixed_q(const Vec& x, double eps, const FixedQProblem& prob);

/// Worst relative stationarity mismatch over modes with x_k > 0.
double stationarity_residual_fixed_q(const FixedQSolution& sol, const FixedQProblem& prob);

/// (P/D) V1_D V1_D^H. Equals (P/D) I when D = m_src.
CMat uniform_source_covariance(const EigenSystem& eig, const SystemParams& params);

/// F = (s2/s1) V2_D diag(sqrt(x_k / (1 + (1-eps) rho1 alpha_k))) U1_D^H.
CMat build_relay_precoder(const FixedQSolution& sol, const EigenSystem& eig,
                          const SystemParams& params);

/// Destination-side determinant rate for the uniform source.
double matrix_rate_fixed_q(const ChannelPair& ch, const CMat& f_mat, double eps,
                           const SystemParams& params);

} // namespace ehrelay
