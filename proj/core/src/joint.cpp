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

#include "ehrelay/joint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehrelay/errors.hpp"

namespace ehrelay
{

namespace
{

constexpr double kLn2 = std::numbers::ln2;

void check_length(const Vec& v, const JointProblem& prob, const char* what)
{
    if (v.size() != prob.alpha.size())
        throw InputError(std::string(what) + " length does not match the number of modes");
}

void check_nonneg(const Vec& v, const char* what)
{
    if (!v.allFinite() || (v.array() < 0.0).any())
        throw InputError(std::string(what) + " must be finite and non-negative");
}

void check_split(double eps, bool allow_one)
{
    if (!(eps >= 0.0) || (allow_one ? eps > 1.0 : eps >= 1.0))
        throw InputError(allow_one ? "eps must lie in [0, 1]" : "eps must lie in [0, 1)");
}

kernel::ModeSet relay_modes(const Vec& q, const JointProblem& prob)
{
    const Vec aq = prob.alpha.cwiseProduct(q);
    return {aq / prob.sigma1_sq, prob.beta / prob.sigma2_sq, prob.eta * aq.sum()};
}

bool collapsed(double lo, double hi)
{
    return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi);
}

} // namespace

void JointProblem::validate() const
{
    if (alpha.size() == 0 || alpha.size() != beta.size())
        throw InputError("alpha and beta must be non-empty and of equal length");
    check_nonneg(alpha, "alpha");
    check_nonneg(beta, "beta");
    if (!(p_source > 0.0) || !std::isfinite(p_source))
        throw InputError("p_source must be positive and finite");
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0) || !std::isfinite(sigma1_sq) ||
        !std::isfinite(sigma2_sq))
        throw InputError("noise powers must be positive and finite");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InputError("eta must lie in [0, 1]");
}

JointProblem JointProblem::from(const EigenSystem& eig, const SystemParams& params)
{
    params.validate();
    JointProblem prob{eig.alpha, eig.beta, params.p_source, params.sigma1_sq,
                      params.sigma2_sq, params.eta};
    prob.validate();
    return prob;
}

double scalar_rate_joint(const Vec& q, const Vec& d, double eps, const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_length(d, prob, "d");
    check_nonneg(q, "q");
    check_nonneg(d, "d");
    check_split(eps, true);
    return kernel::rate(d, eps, relay_modes(q, prob));
}

Vec optimal_d(double mu, double eps, const Vec& q, const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_nonneg(q, "q");
    check_split(eps, false);
    if (!(mu > 0.0))
        throw InputError("optimal_d needs mu > 0");
    return kernel::allocation(mu, eps, relay_modes(q, prob));
}

double dual_function_joint(double mu, double eps, const Vec& q, const JointProblem& prob)
{
    check_length(q, prob, "q");
    if (!(mu > 0.0))
        throw InputError("dual function needs mu > 0");
    return kernel::dual_function(mu, eps, relay_modes(q, prob));
}

double dual_root_joint(double eps, const Vec& q, const JointProblem& prob, double tol)
{
    check_length(q, prob, "q");
    check_nonneg(q, "q");
    if (!(tol > 0.0))
        throw InputError("tolerance must be positive");
    return kernel::dual_root(eps, relay_modes(q, prob), tol);
}

double eps_update_joint(const Vec& d, const Vec& q, const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_length(d, prob, "d");
    return kernel::split_update(d, relay_modes(q, prob));
}

RelayStep subproblem_a(const Vec& q, const JointProblem& prob, const SplitOptions& opts)
{
    check_length(q, prob, "q");
    check_nonneg(q, "q");
    auto res = kernel::solve(relay_modes(q, prob), opts);
    return {std::move(res.alloc), res.eps, res.mu, res.capacity, res.converged, res.iterations};
}

Vec activation_levels(double eps, const Vec& d, const JointProblem& prob)
{
    check_length(d, prob, "d");
    Vec phi(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        const double bd = prob.beta[k] * d[k];
        phi[k] = (1.0 - eps) * prob.alpha[k] * bd /
                 (2.0 * prob.sigma1_sq * kLn2 * (prob.sigma2_sq + bd));
    }
    return phi;
}

std::optional<Vec> optimal_q(double nu1, double nu2, double eps, const Vec& d,
                             const JointProblem& prob)
{
    check_length(d, prob, "d");
    check_split(eps, false);
    Vec q(d.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
        const double nu_hat = 2.0 * (nu1 - nu2 * eps * prob.eta * prob.alpha[k]);
        if (!(nu_hat > 0.0))
            return std::nullopt;
        const double u = (1.0 - eps) * prob.alpha[k] / prob.sigma1_sq;
        const double w = prob.beta[k] * d[k] / prob.sigma2_sq;
        if (!(u > 0.0) || !(w > 0.0)) {
            q[k] = 0.0;
            continue;
        }
        // sqrt(w^2 + c) - w written without cancellation
        const double c = 4.0 * u * w / (kLn2 * nu_hat);
        const double level = c / (std::sqrt(w * w + c) + w) - 2.0;
        q[k] = level > 0.0 ? level / (2.0 * u) : 0.0;
    }
    return q;
}

namespace
{

struct InnerResult
{
    Vec q;
    double nu2 = 0.0;
    bool ok = false;
};

// nu2 that makes the harvest cover sum(d) at fixed nu1. The harvest grows
// without bound as nu2 approaches nu1 / (eps eta alpha_max), so the
// bracket [0, that cap) always contains the answer.
InnerResult harvest_bisection(double nu1, double eps, const Vec& d, const Vec& phi,
                              const JointProblem& prob)
{
    const double need = d.sum();
    const double coeff = eps * prob.eta;
    auto harvest = [&](const Vec& q) { return coeff * prob.alpha.dot(q); };

    InnerResult out;
    auto free_q = optimal_q(nu1, 0.0, eps, d, prob);
    if (!free_q)
        return out;
    if (harvest(*free_q) >= need) {
        out.q = std::move(*free_q);
        out.ok = true;
        return out;
    }

    const double alpha_max = prob.alpha.maxCoeff();
    if (!(coeff * alpha_max > 0.0))
        return out;
    const double cap = nu1 / (coeff * alpha_max);
    double lo = 0.0;
    double theta_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < d.size(); ++k)
        if (prob.alpha[k] > 0.0)
            theta_min = std::min(theta_min, (nu1 - phi[k]) / (coeff * prob.alpha[k]));
    if (theta_min > 0.0 && theta_min < cap)
        lo = theta_min;
    double hi = cap;

    for (int it = 0; it < 400 && !collapsed(lo, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        auto q = optimal_q(nu1, mid, eps, d, prob);
        if (!q) {
            hi = mid;
            continue;
        }
        const double h = harvest(*q);
        if (h >= need) {
            hi = mid;
            out.q = std::move(*q);
            out.nu2 = mid;
            out.ok = true;
            if (h - need <= 1e-13 * need)
                break;
        } else {
            lo = mid;
        }
    }
    // q is steep in nu2 near the cap, so the bisection resolves the harvest
    // only to about 1e-10. Close the remaining gap by scaling.
    if (out.ok) {
        const double h = harvest(out.q);
        if (h > need)
            out.q *= need / h;
    }
    return out;
}

} // namespace

DualDecompositionResult dual_decomposition_q(const Vec& d, double eps, const JointProblem& prob,
                                             const JointOptions& opts)
{
    prob.validate();
    check_length(d, prob, "d");
    check_nonneg(d, "d");
    if (!(eps > 0.0 && eps < 1.0))
        throw InputError("dual decomposition needs 0 < eps < 1");
    if (!(d.sum() > 0.0))
        throw InputError("dual decomposition needs sum(d) > 0");

    DualDecompositionResult out;
    out.q = Vec::Zero(d.size());
    const Vec phi = activation_levels(eps, d, prob);
    const double start = phi.maxCoeff();
    if (!(start > 0.0))
        return out;

    const double power = prob.p_source;
    // Excess within this slack counts as met: when the harvest pins q the
    // excess stays at rounding level for every nu1 and never changes sign.
    const double slack = 1e-12 * power;
    // Positive excess means nu1 is too small. A point where the harvest
    // cannot be met counts as nu1 too large.
    struct Probe
    {
        InnerResult inner;
        double excess;
    };
    auto probe = [&](double nu1) {
        Probe p{harvest_bisection(nu1, eps, d, phi, prob), -power};
        if (p.inner.ok)
            p.excess = p.inner.q.sum() - power;
        return p;
    };
    auto offset = [&](int j) {
        return opts.growth == DualGrowth::geometric ? 1e-4 * std::ldexp(1.0, j) : 1e-4 * (j + 1);
    };

    double lo = start;
    double hi = start;
    Probe at_hi = probe(start);
    if (at_hi.excess > slack) {
        int j = 0;
        for (; j < opts.max_expansions; ++j) {
            lo = hi;
            hi = start + offset(j);
            at_hi = probe(hi);
            if (at_hi.excess <= slack)
                break;
        }
        if (j == opts.max_expansions)
            return out;
    } else {
        int j = 1;
        for (; j <= opts.max_expansions; ++j) {
            lo = std::ldexp(start, -j);
            if (probe(lo).excess > slack)
                break;
            hi = lo;
        }
        if (j > opts.max_expansions)
            return out;
        at_hi = probe(hi);
    }

    for (int it = 0; it < 400; ++it) {
        if (at_hi.inner.ok && std::abs(at_hi.excess) <= slack)
            break;
        if (hi - lo <= opts.dual_rel_tol * hi || collapsed(lo, hi))
            break;
        const double mid = 0.5 * (lo + hi);
        Probe p = probe(mid);
        if (p.excess > slack) {
            lo = mid;
        } else {
            hi = mid;
            at_hi = std::move(p);
        }
    }
    if (!at_hi.inner.ok)
        return out;
    out.q = std::move(at_hi.inner.q);
    out.nu1 = hi;
    out.nu2 = at_hi.inner.nu2;
    out.feasible = true;
    return out;
}

double source_slack(const Vec& q, const JointProblem& prob)
{
    check_length(q, prob, "q");
    return prob.p_source - q.sum();
}

double harvest_slack(const Vec& q, const Vec& d, double eps, const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_length(d, prob, "d");
    return eps * prob.eta * prob.alpha.dot(q) - d.sum();
}

namespace
{

struct ModeSlopes
{
    double dq; // d rate / d q_k
    double dd; // d rate / d d_k
};

ModeSlopes slopes(Eigen::Index k, const Vec& q, const Vec& d, double eps,
                  const JointProblem& prob)
{
    const double u = (1.0 - eps) * prob.alpha[k] / prob.sigma1_sq;
    const double v = prob.beta[k] / prob.sigma2_sq;
    const double a = u * q[k];
    const double w = v * d[k];
    const double s = 1.0 + a + w;
    return {u * w / ((1.0 + a) * s) / (2.0 * kLn2), v * a / ((1.0 + w) * s) / (2.0 * kLn2)};
}

double relative_gap(double lhs, double rhs)
{
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

} // namespace

double relay_stationarity_residual(const Vec& q, const Vec& d, double eps, double mu,
                                   const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_length(d, prob, "d");
    double worst = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        if (!(q[k] > 0.0 && d[k] > 0.0))
            continue;
        worst = std::max(worst, std::abs(slopes(k, q, d, eps, prob).dd * mu - 1.0));
    }
    return worst;
}

double source_stationarity_residual(const Vec& q, const Vec& d, double eps, double nu1,
                                    double nu2, const JointProblem& prob)
{
    check_length(q, prob, "q");
    check_length(d, prob, "d");
    double worst = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        if (!(q[k] > 0.0 && d[k] > 0.0))
            continue;
        const double price = nu1 - nu2 * eps * prob.eta * prob.alpha[k];
        worst = std::max(worst, relative_gap(slopes(k, q, d, eps, prob).dq, price));
    }
    return worst;
}

JointSolution solve_joint(const JointProblem& prob, const JointOptions& opts)
{
    prob.validate();
    if (!(opts.threshold > 0.0) || opts.max_outer < 1 || opts.max_expansions < 1 ||
        !(opts.dual_rel_tol > 0.0))
        throw InputError("invalid joint solver options");

    const Eigen::Index n = prob.alpha.size();
    JointSolution sol;
    sol.q = Vec::Constant(n, prob.p_source / static_cast<double>(n));
    sol.d = Vec::Zero(n);
    if (kernel::degenerate(relay_modes(sol.q, prob))) {
        sol.converged = true;
        sol.history.push_back(0.0);
        return sol;
    }

    auto first = subproblem_a(sol.q, prob, opts.split);
    sol.d = std::move(first.d);
    sol.eps = first.eps;
    sol.mu = first.mu;
    sol.capacity = first.capacity;
    sol.history.push_back(sol.capacity);

    auto interior = [&] { return sol.eps > 0.0 && sol.eps < 1.0 && sol.d.sum() > 0.0; };

    for (int it = 1; it <= opts.max_outer; ++it) {
        const double before = sol.capacity;

        if (interior()) {
            auto b = dual_decomposition_q(sol.d, sol.eps, prob, opts);
            if (b.feasible) {
                const double c = scalar_rate_joint(b.q, sol.d, sol.eps, prob);
                if (c >= sol.capacity) {
                    sol.q = std::move(b.q);
                    sol.nu1 = b.nu1;
                    sol.nu2 = b.nu2;
                    sol.capacity = c;
                }
            }
        }

        if (opts.coupled_refinement && interior()) {
            auto c = coupled_refinement(sol.q, sol.d, sol.eps, prob, opts.refinement_iterations);
            if (c.capacity >= sol.capacity) {
                sol.q = std::move(c.q);
                sol.d = std::move(c.d);
                sol.nu1 = c.nu1;
                sol.nu2 = c.nu2;
                sol.capacity = c.capacity;
            }
        }

        auto a = subproblem_a(sol.q, prob, opts.split);
        if (a.capacity >= sol.capacity) {
            sol.d = std::move(a.d);
            sol.eps = a.eps;
            sol.mu = a.mu;
            sol.capacity = a.capacity;
        }

        sol.history.push_back(sol.capacity);
        sol.iterations = it;
        if (sol.capacity - before <= opts.threshold) {
            sol.converged = true;
            break;
        }
    }

    // Settle q and d at the final eps so both constraints are tight and the
    // reported multipliers belong to the returned point.
    if (opts.coupled_refinement && interior()) {
        auto c = coupled_refinement(sol.q, sol.d, sol.eps, prob, opts.refinement_iterations);
        if (c.capacity >= sol.capacity - 1e-12 * std::max(1.0, sol.capacity)) {
            sol.q = std::move(c.q);
            sol.d = std::move(c.d);
            sol.nu1 = c.nu1;
            sol.nu2 = c.nu2;
            sol.mu = c.nu2 > 0.0 ? 1.0 / c.nu2 : 0.0;
            sol.capacity = c.capacity;
            sol.history.push_back(sol.capacity);
        }
    }
    return sol;
}

JointMatrices build_joint_matrices(const JointSolution& sol, const EigenSystem& eig,
                                   const JointProblem& prob)
{
    const Eigen::Index n = eig.streams();
    if (sol.q.size() != n || sol.d.size() != n || prob.alpha.size() != n)
        throw InputError("solution length does not match the eigensystem");
    Vec gain(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double denom = (1.0 - sol.eps) * prob.alpha[k] * sol.q[k] + prob.sigma1_sq;
        gain[k] = std::sqrt(sol.d[k] / denom);
    }
    const CMat v1 = eig.v1.leftCols(n);
    JointMatrices out;
    out.q = v1 * sol.q.cast<std::complex<double>>().asDiagonal() * v1.adjoint();
    out.f = eig.v2.leftCols(n) * gain.cast<std::complex<double>>().asDiagonal() *
            eig.u1.leftCols(n).adjoint();
    return out;
}

} // namespace ehrelay
