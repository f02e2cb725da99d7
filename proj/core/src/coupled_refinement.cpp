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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ehrelay/errors.hpp"
#include "ehrelay/joint.hpp"

namespace ehrelay
{

namespace
{

using Mat = Eigen::MatrixXd;

constexpr double kLn2 = std::numbers::ln2;

// Rate over y = (q / P, d / sd) with its gradient and Hessian. The Hessian
// is block diagonal over modes: each mode couples only q_k and d_k.
struct ScaledRate
{
    Vec u;
    Vec v;
    double power;
    double sd;

    Eigen::Index modes() const { return u.size(); }

    double value(const Vec& y) const
    {
        const Eigen::Index n = modes();
        double bits = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            const double a = u[k] * power * std::max(y[k], 0.0);
            const double w = v[k] * sd * std::max(y[n + k], 0.0);
            bits += std::log1p(a * w / (1.0 + a + w));
        }
        return 0.5 * bits / kLn2;
    }

    void derivatives(const Vec& y, Vec& g, Mat& h) const
    {
        const Eigen::Index n = modes();
        g.setZero(2 * n);
        h.setZero(2 * n, 2 * n);
        const double c = 1.0 / (2.0 * kLn2);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double uq = u[k] * power;
            const double vd = v[k] * sd;
            const double a = uq * y[k];
            const double w = vd * y[n + k];
            const double ia = 1.0 / (1.0 + a);
            const double iw = 1.0 / (1.0 + w);
            const double is = 1.0 / (1.0 + a + w);
            g[k] = c * uq * w * ia * is;
            g[n + k] = c * vd * a * iw * is;
            h(k, k) = c * uq * uq * (is * is - ia * ia);
            h(n + k, n + k) = c * vd * vd * (is * is - iw * iw);
            h(k, n + k) = h(n + k, k) = c * uq * vd * is * is;
        }
    }
};

struct Multipliers
{
    Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
    double stationarity = 0.0; // largest |reduced gradient| over free variables
    double release = 0.0;      // largest reduced gradient over bound variables
    Eigen::Index release_index = -1;
};

// Least-squares multipliers of the two equality rows restricted to the
// free variables, and the reduced gradients they imply.
Multipliers estimate(const Vec& g, const Mat& rows, const std::vector<bool>& bound)
{
    const Eigen::Index m = g.size();
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < m; ++i)
        if (!bound[i])
            free_idx.push_back(i);

    Multipliers out;
    if (!free_idx.empty()) {
        Mat at(free_idx.size(), 2);
        Vec gf(free_idx.size());
        for (std::size_t j = 0; j < free_idx.size(); ++j) {
            at.row(j) = rows.col(free_idx[j]).transpose();
            gf[j] = g[free_idx[j]];
        }
        out.lambda = at.completeOrthogonalDecomposition().solve(gf);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        const double r = g[i] - rows.col(i).dot(out.lambda);
        if (!bound[i]) {
            out.stationarity = std::max(out.stationarity, std::abs(r));
        } else if (r > out.release) {
            out.release = r;
            out.release_index = i;
        }
    }
    return out;
}

// Ascent direction in the null space of the free-variable constraint rows,
// from the reduced Hessian with its spectrum pushed below zero.
Vec newton_direction(const Vec& g, const Mat& h, const Mat& rows, const std::vector<bool>& bound)
{
    const Eigen::Index m = g.size();
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < m; ++i)
        if (!bound[i])
            free_idx.push_back(i);
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
    Vec p = Vec::Zero(m);
    if (nf == 0)
        return p;

    Mat af(2, nf);
    Vec gf(nf);
    Mat hf(nf, nf);
    for (Eigen::Index j = 0; j < nf; ++j) {
        af.col(j) = rows.col(free_idx[j]);
        gf[j] = g[free_idx[j]];
        for (Eigen::Index l = 0; l < nf; ++l)
            hf(j, l) = h(free_idx[j], free_idx[l]);
    }

    Eigen::JacobiSVD<Mat> svd(af, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-12 * std::max(1.0, sv[0]))
            ++rank;
    if (rank >= nf)
        return p;
    const Mat z = svd.matrixV().rightCols(nf - rank);

    const Mat hr = z.transpose() * hf * z;
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (hr + hr.transpose()));
    Vec lam = eig.eigenvalues();
    const double scale = std::max(1e-300, lam.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        lam[i] = std::min(lam[i], -1e-8 * scale);
    const Vec rg = z.transpose() * gf;
    const Vec step = -eig.eigenvectors() *
                     (eig.eigenvectors().transpose() * rg).cwiseQuotient(lam);
    const Vec pf = z * step;
    for (Eigen::Index j = 0; j < nf; ++j)
        p[free_idx[j]] = pf[j];
    return p;
}

} // namespace

CoupledStep coupled_refinement(const Vec& q0, const Vec& d0, double eps, const JointProblem& prob,
                               int max_iterations)
{
    prob.validate();
    const Eigen::Index n = prob.alpha.size();
    if (q0.size() != n || d0.size() != n)
        throw InputError("q and d must match the number of modes");
    if (!(eps > 0.0 && eps < 1.0))
        throw InputError("coupled refinement needs 0 < eps < 1");

    CoupledStep out;
    out.q = q0.cwiseMax(0.0);
    out.d = d0.cwiseMax(0.0);
    const double power = prob.p_source;
    const double harvest_coeff = eps * prob.eta;
    if (!(out.q.sum() > 0.0) || !(out.d.sum() > 0.0)) {
        out.capacity = scalar_rate_joint(out.q, out.d, eps, prob);
        return out;
    }
    // Both constraints bind at any maximizer for fixed eps: the rate grows
    // in every q_k and d_k, and so does the harvest in q_k.
    out.q *= power / out.q.sum();
    const double sd = harvest_coeff * prob.alpha.dot(out.q);
    if (!(sd > 0.0)) {
        out.capacity = scalar_rate_joint(out.q, out.d, eps, prob);
        return out;
    }
    out.d *= sd / out.d.sum();

    ScaledRate f{(1.0 - eps) * prob.alpha / prob.sigma1_sq, prob.beta / prob.sigma2_sq, power, sd};
    Mat rows = Mat::Zero(2, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        rows(0, k) = 1.0;
        rows(1, k) = harvest_coeff * prob.alpha[k] * power / sd;
        rows(1, n + k) = -1.0;
    }

    Vec y(2 * n);
    y << out.q / power, out.d / sd;
    std::vector<bool> bound(2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i)
        bound[i] = !(y[i] > 0.0);

    Vec g;
    Mat h;
    double value = f.value(y);
    constexpr double tiny = std::numeric_limits<double>::epsilon();
    int it = 0;
    for (; it < max_iterations; ++it) {
        f.derivatives(y, g, h);
        const auto mult = estimate(g, rows, bound);
        const double tol = 1e-13 * std::max(1e-300, g.cwiseAbs().maxCoeff());
        if (mult.stationarity <= tol) {
            if (mult.release_index < 0 || mult.release <= tol) {
                out.converged = true;
                break;
            }
            bound[mult.release_index] = false;
            continue;
        }

        const Vec p = newton_direction(g, h, rows, bound);
        const double slope = g.dot(p);
        if (!(slope > 0.0))
            break;

        double t_max = std::numeric_limits<double>::infinity();
        Eigen::Index blocking = -1;
        for (Eigen::Index i = 0; i < 2 * n; ++i) {
            if (!bound[i] && p[i] < 0.0 && -y[i] / p[i] < t_max) {
                t_max = -y[i] / p[i];
                blocking = i;
            }
        }
        double t = std::min(1.0, t_max);
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            Vec trial = y + t * p;
            const double tv = f.value(trial);
            if (tv >= value + 1e-4 * t * slope - 4.0 * tiny * std::abs(value)) {
                if (t == t_max && blocking >= 0) {
                    trial[blocking] = 0.0;
                    bound[blocking] = true;
                }
                y = trial.cwiseMax(0.0);
                value = f.value(y);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            break;
    }
    out.iterations = it;

    // Undo the drift of repeated steps and read the multipliers off the
    // final point.
    out.q = power * y.head(n);
    out.q *= power / out.q.sum();
    const double budget = harvest_coeff * prob.alpha.dot(out.q);
    out.d = sd * y.tail(n);
    out.d *= budget / out.d.sum();
    y << out.q / power, out.d / sd;
    f.derivatives(y, g, h);
    const auto mult = estimate(g, rows, bound);
    out.nu1 = mult.lambda[0] / power;
    out.nu2 = -mult.lambda[1] / sd;
    out.capacity = scalar_rate_joint(out.q, out.d, eps, prob);
    return out;
}

} // namespace ehrelay
