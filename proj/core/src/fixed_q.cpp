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

#include "ehrelay/fixed_q.hpp"

#include <cmath>

#include "ehrelay/errors.hpp"
#include "ehrelay/matrix_model.hpp"

namespace ehrelay
{

namespace
{

bool finite_nonneg(const Vec& v) { return v.allFinite() && (v.array() >= 0.0).all(); }

void check_length(const Vec& v, const FixedQProblem& prob, const char* what)
{
    if (v.size() != prob.alpha.size())
        throw InputError(std::string(what) + " length does not match the number of modes");
}

} // namespace

void FixedQProblem::validate() const
{
    if (alpha.size() == 0 || alpha.size() != beta.size())
        throw InputError("alpha and beta must be non-empty and of equal length");
    if (!finite_nonneg(alpha) || !finite_nonneg(beta))
        throw InputError("mode gains must be finite and non-negative");
    if (!(rho1 > 0.0) || !(rho2 > 0.0) || !std::isfinite(rho1) || !std::isfinite(rho2))
        throw InputError("rho1 and rho2 must be positive and finite");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InputError("eta must lie in [0, 1]");
}

FixedQProblem FixedQProblem::from(const EigenSystem& eig, const SystemParams& params)
{
    params.validate();
    const auto snr = snr_pair(params);
    FixedQProblem prob{eig.alpha, eig.beta, snr.rho1, snr.rho2, params.eta};
    prob.validate();
    return prob;
}

kernel::ModeSet FixedQProblem::modes() const
{
    return {rho1 * alpha, beta, eta * rho2 * alpha.sum()};
}

double scalar_rate_fixed_q(const Vec& x, double eps, const FixedQProblem& prob)
{
    check_length(x, prob, "x");
    if (!finite_nonneg(x) || !(eps >= 0.0 && eps <= 1.0))
        throw InputError("rate needs x >= 0 and eps in [0, 1]");
    return kernel::rate(x, eps, prob.modes());
}

Vec optimal_x(double mu, double eps, const FixedQProblem& prob)
{
    if (!(mu > 0.0) || !(eps >= 0.0 && eps < 1.0))
        throw InputError("optimal_x needs mu > 0 and eps in [0, 1)");
    return kernel::allocation(mu, eps, prob.modes());
}

double dual_function_fixed_q(double mu, double eps, const FixedQProblem& prob)
{
    if (!(mu > 0.0))
        throw InputError("dual function needs mu > 0");
    return kernel::dual_function(mu, eps, prob.modes());
}

double dual_root_fixed_q(double eps, const FixedQProblem& prob, double tol)
{
    if (!(tol > 0.0))
        throw InputError("tolerance must be positive");
    return kernel::dual_root(eps, prob.modes(), tol);
}

double eps_update_fixed_q(const Vec& x, const FixedQProblem& prob)
{
    check_length(x, prob, "x");
    return kernel::split_update(x, prob.modes());
}

FixedQSolution solve_fixed_q(const FixedQProblem& prob, const SplitOptions& opts)
{
    prob.validate();
    auto res = kernel::solve(prob.modes(), opts);
    return {std::move(res.alloc), res.eps, res.mu, res.capacity, res.converged, res.iterations};
}

double energy_slack_fixed_q(const Vec& x, double eps, const FixedQProblem& prob)
{
    check_length(x, prob, "x");
    return eps * prob.modes().budget_coeff - x.sum();
}

double stationarity_residual_fixed_q(const FixedQSolution& sol, const FixedQProblem& prob)
{
    check_length(sol.x, prob, "x");
    return kernel::stationarity_residual(sol.x, sol.eps, sol.mu, prob.modes());
}

CMat uniform_source_covariance(const EigenSystem& eig, const SystemParams& params)
{
    const Eigen::Index d = eig.streams();
    const CMat v = eig.v1.leftCols(d);
    return (params.p_source / static_cast<double>(d)) * v * v.adjoint();
}

CMat build_relay_precoder(const FixedQSolution& sol, const EigenSystem& eig,
                          const SystemParams& params)
{
    const Eigen::Index d = eig.streams();
    if (sol.x.size() != d)
        throw InputError("allocation length does not match the eigensystem");
    const double rho1 = snr_pair(params).rho1;
    Vec gain(d);
    for (Eigen::Index k = 0; k < d; ++k)
        gain[k] = std::sqrt(sol.x[k] / (1.0 + (1.0 - sol.eps) * rho1 * eig.alpha[k]));
    const double scale = std::sqrt(params.sigma2_sq / params.sigma1_sq);
    return scale * eig.v2.leftCols(d) * gain.cast<std::complex<double>>().asDiagonal() *
           eig.u1.leftCols(d).adjoint();
}

double matrix_rate_fixed_q(const ChannelPair& ch, const CMat& f_mat, double eps,
                           const SystemParams& params)
{
    validate_channel(ch, params);
    const auto eig = decompose(ch, params.d_streams);
    return matrix_rate(ch, uniform_source_covariance(eig, params), f_mat, eps, params);
}

} // namespace ehrelay
