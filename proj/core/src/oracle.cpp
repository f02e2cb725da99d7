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

#include "ehrelay/oracle.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "ehrelay/errors.hpp"

namespace ehrelay
{

namespace
{

constexpr int kMaxModes = 3;
constexpr int kRefinePoints = 9;

using Index = std::array<int, kMaxModes>;

// Per-mode gain factor of the product form of the rate:
// (1+a)(1+w)/(1+a+w) = 1 + a w/(1+a+w).
inline double mode_factor(double a, double w) { return 1.0 + a * w / (1.0 + a + w); }

double bits_of(const Vec& a, const Vec& w)
{
    double total = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k)
        total += std::log2(mode_factor(a[k], w[k]));
    return 0.5 * total;
}

// Visits every (j_0, ..., j_{dims-1}) >= 0 with sum <= top in
// lexicographic order.
template <class Fn>
void compositions(int dims, int top, Index& idx, int level, Fn& fn)
{
    if (level == dims) {
        fn(idx);
        return;
    }
    for (int j = 0; j <= top; ++j) {
        idx[level] = j;
        compositions(dims, top - j, idx, level + 1, fn);
    }
    idx[level] = 0;
}

template <class Fn>
void for_each_composition(int dims, int top, Fn&& fn)
{
    Index idx{};
    compositions(dims, top, idx, 0, fn);
}

// Visits a kRefinePoints^dims lattice of offsets in [-1, 1]^dims.
template <class Fn>
void for_each_offset(int dims, Fn&& fn)
{
    std::vector<int> idx(dims, 0);
    std::vector<double> offset(dims);
    const int half = kRefinePoints / 2;
    for (;;) {
        for (int i = 0; i < dims; ++i)
            offset[i] = static_cast<double>(idx[i] - half) / half;
        fn(offset);
        int i = dims - 1;
        while (i >= 0 && ++idx[i] == kRefinePoints)
            idx[i--] = 0;
        if (i < 0)
            return;
    }
}

// Fractions on {f >= 0, sum f <= 1}; nudged inward against rounding.
bool on_simplex(const Vec& f)
{
    return (f.array() >= 0.0).all() && f.sum() <= 1.0;
}

void clamp_to_budget(Vec& v, double budget)
{
    const double used = v.sum();
    if (used > budget)
        v *= used > 0.0 ? budget / used : 0.0;
}

void check_modes(Eigen::Index n, int limit)
{
    if (n < 1 || n > limit)
        throw InputError("oracle supports at most " + std::to_string(limit) + " modes");
}

} // namespace

void GridSpec::validate() const
{
    if (eps_steps < 2 || simplex_steps < 2)
        throw InputError("grid needs at least 2 points per axis");
    if (refine_rounds < 0)
        throw InputError("refine_rounds must be non-negative");
}

OracleFixedQ oracle_fixed_q(const FixedQProblem& prob, const GridSpec& grid)
{
    prob.validate();
    grid.validate();
    const Eigen::Index n = prob.alpha.size();
    check_modes(n, kMaxModes);
    const int dims = static_cast<int>(n);

    const Vec first = prob.rho1 * prob.alpha;
    const double budget_coeff = prob.eta * prob.rho2 * prob.alpha.sum();
    const int top = grid.simplex_steps - 1;
    const double eps_step = 1.0 / (grid.eps_steps - 1);
    const double frac_step = 1.0 / top;

    double best = 1.0;
    double best_eps = 0.0;
    Vec best_frac = Vec::Zero(n);

    std::vector<std::vector<double>> table(n, std::vector<double>(top + 1));
    for (int i = 0; i < grid.eps_steps; ++i) {
        const double eps = i * eps_step;
        const double budget = eps * budget_coeff;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double a = (1.0 - eps) * first[k];
            for (int j = 0; j <= top; ++j)
                table[k][j] = mode_factor(a, prob.beta[k] * budget * j * frac_step);
        }
        for_each_composition(dims, top, [&](const Index& idx) {
            double value = 1.0;
            for (int k = 0; k < dims; ++k)
                value *= table[k][idx[k]];
            if (value > best) {
                best = value;
                best_eps = eps;
                for (int k = 0; k < dims; ++k)
                    best_frac[k] = idx[k] * frac_step;
            }
        });
    }

    auto value_at = [&](double eps, const Vec& frac) {
        double value = 1.0;
        for (Eigen::Index k = 0; k < n; ++k)
            value *= mode_factor((1.0 - eps) * first[k],
                                 prob.beta[k] * eps * budget_coeff * frac[k]);
        return value;
    };

    double half_eps = eps_step;
    double half_frac = frac_step;
    for (int round = 0; round < grid.refine_rounds; ++round) {
        const double centre_eps = best_eps;
        const Vec centre_frac = best_frac;
        Vec frac(n);
        for_each_offset(dims + 1, [&](const std::vector<double>& off) {
            const double eps = centre_eps + half_eps * off[0];
            if (eps < 0.0 || eps > 1.0)
                return;
            for (Eigen::Index k = 0; k < n; ++k)
                frac[k] = centre_frac[k] + half_frac * off[k + 1];
            if (!on_simplex(frac))
                return;
            const double value = value_at(eps, frac);
            if (value > best) {
                best = value;
                best_eps = eps;
                best_frac = frac;
            }
        });
        half_eps /= 4.0;
        half_frac /= 4.0;
    }

    OracleFixedQ out;
    out.eps = best_eps;
    out.x = best_eps * budget_coeff * best_frac;
    clamp_to_budget(out.x, best_eps * budget_coeff);
    Vec a = (1.0 - out.eps) * first;
    out.capacity = bits_of(a, prob.beta.cwiseProduct(out.x));
    return out;
}

OracleJoint oracle_joint(const JointProblem& prob, const GridSpec& grid)
{
    grid.validate();
    const Eigen::Index n = prob.alpha.size();
    check_modes(n, 2);
    if (prob.beta.size() != n)
        throw InputError("alpha and beta must have equal length");
    if (!(prob.p_source >= 0.0) || !(prob.sigma1_sq > 0.0) || !(prob.sigma2_sq > 0.0) ||
        !(prob.eta >= 0.0 && prob.eta <= 1.0) || !prob.alpha.allFinite() ||
        !prob.beta.allFinite() || (prob.alpha.array() < 0.0).any() ||
        (prob.beta.array() < 0.0).any())
        throw InputError("invalid joint problem");
    const int dims = static_cast<int>(n);

    const Vec u = prob.alpha / prob.sigma1_sq;
    const Vec v = prob.beta / prob.sigma2_sq;
    const double power = prob.p_source;
    const int top = grid.simplex_steps - 1;
    const double eps_step = 1.0 / (grid.eps_steps - 1);
    const double frac_step = 1.0 / top;

    double best = 1.0;
    double best_eps = 0.0;
    Vec best_qf = Vec::Zero(n);
    Vec best_df = Vec::Zero(n);

    std::vector<std::vector<double>> table(n, std::vector<double>(top + 1));
    for (int i = 0; i < grid.eps_steps; ++i) {
        const double eps = i * eps_step;
        for_each_composition(dims, top, [&](const Index& qi) {
            double harvest = 0.0;
            for (int k = 0; k < dims; ++k)
                harvest += prob.alpha[k] * power * qi[k] * frac_step;
            const double budget = eps * prob.eta * harvest;
            for (int k = 0; k < dims; ++k) {
                const double a = (1.0 - eps) * u[k] * power * qi[k] * frac_step;
                for (int j = 0; j <= top; ++j)
                    table[k][j] = mode_factor(a, v[k] * budget * j * frac_step);
            }
            for_each_composition(dims, top, [&](const Index& di) {
                double value = 1.0;
                for (int k = 0; k < dims; ++k)
                    value *= table[k][di[k]];
                if (value > best) {
                    best = value;
                    best_eps = eps;
                    for (int k = 0; k < dims; ++k) {
                        best_qf[k] = qi[k] * frac_step;
                        best_df[k] = di[k] * frac_step;
                    }
                }
            });
        });
    }

    auto value_at = [&](double eps, const Vec& qf, const Vec& df) {
        const double budget = eps * prob.eta * power * prob.alpha.dot(qf);
        double value = 1.0;
        for (Eigen::Index k = 0; k < n; ++k)
            value *= mode_factor((1.0 - eps) * u[k] * power * qf[k], v[k] * budget * df[k]);
        return value;
    };

    double half_eps = eps_step;
    double half_frac = frac_step;
    for (int round = 0; round < grid.refine_rounds; ++round) {
        const double centre_eps = best_eps;
        const Vec centre_q = best_qf;
        const Vec centre_d = best_df;
        Vec qf(n);
        Vec df(n);
        for_each_offset(2 * dims + 1, [&](const std::vector<double>& off) {
            const double eps = centre_eps + half_eps * off[0];
            if (eps < 0.0 || eps > 1.0)
                return;
            for (Eigen::Index k = 0; k < n; ++k) {
                qf[k] = centre_q[k] + half_frac * off[1 + k];
                df[k] = centre_d[k] + half_frac * off[1 + n + k];
            }
            if (!on_simplex(qf) || !on_simplex(df))
                return;
            const double value = value_at(eps, qf, df);
            if (value > best) {
                best = value;
                best_eps = eps;
                best_qf = qf;
                best_df = df;
            }
        });
        half_eps /= 4.0;
        half_frac /= 4.0;
    }

    OracleJoint out;
    out.eps = best_eps;
    out.q = power * best_qf;
    clamp_to_budget(out.q, power);
    const double budget = best_eps * prob.eta * prob.alpha.dot(out.q);
    out.d = budget * best_df;
    clamp_to_budget(out.d, budget);
    const Vec a = (1.0 - out.eps) * u.cwiseProduct(out.q);
    out.capacity = bits_of(a, v.cwiseProduct(out.d));
    return out;
}

} // namespace ehrelay
