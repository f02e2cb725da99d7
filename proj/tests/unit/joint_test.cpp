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

#include <cmath>
#include <numbers>

#include "doctest.h"

#include "ehrelay/errors.hpp"
#include "ehrelay/fixed_q.hpp"
#include "ehrelay/joint.hpp"
#include "ehrelay/matrix_model.hpp"
#include "ehrelay/oracle.hpp"
#include "instances.hpp"

using namespace ehrelay;
using ehrelay::testing::random_instance;
using ehrelay::testing::relative_error;

namespace
{

constexpr double ln2 = std::numbers::ln2;

JointProblem unit_problem(int modes)
{
    return {Vec::Ones(modes), Vec::Ones(modes), 1.0, 1.0, 1.0, 1.0};
}

} // namespace

TEST_CASE("joint rate vanishes without either hop")
{
    const auto prob = random_instance(1, 3).joint;
    CHECK(scalar_rate_joint(Vec::Constant(3, 10.0), Vec::Zero(3), 0.2, prob) == 0.0);
    CHECK(scalar_rate_joint(Vec::Zero(3), Vec::Constant(3, 10.0), 0.2, prob) == 0.0);
}

TEST_CASE("single-mode joint rate by hand")
{
    // (1-eps) alpha q / s1^2 = 3 and beta d / s2^2 = 1
    JointProblem prob{Vec::Constant(1, 2.0), Vec::Constant(1, 0.5), 10.0, 2.0, 4.0, 0.5};
    const double eps = 0.25;
    const double q = 3.0 * 2.0 / ((1.0 - eps) * 2.0);
    const double d = 1.0 * 4.0 / 0.5;
    CHECK(scalar_rate_joint(Vec::Constant(1, q), Vec::Constant(1, d), eps, prob) ==
          doctest::Approx(0.5 * std::log2(1.6)).epsilon(1e-14));
    CHECK_THROWS_AS(scalar_rate_joint(Vec::Ones(2), Vec::Ones(1), eps, prob), InputError);
}

TEST_CASE("relay allocation at and above the activation threshold")
{
    const auto prob = unit_problem(1);
    const Vec q = Vec::Ones(1);
    CHECK(optimal_d(4.0 * ln2, 0.0, q, prob)[0] == 0.0);
    CHECK(optimal_d(8.0 * ln2, 0.0, q, prob)[0] ==
          doctest::Approx(0.5 * (std::sqrt(17.0) - 3.0)).epsilon(1e-13));
    CHECK(optimal_d(8.0 * ln2, 0.0, Vec::Zero(1), prob)[0] == 0.0);
}

TEST_CASE("relay allocation sees the destination link only through beta over s2^2")
{
    JointProblem a{Vec::Constant(1, 1.0), Vec::Constant(1, 1.0), 1.0, 1.0, 1.0, 1.0};
    JointProblem b{Vec::Constant(1, 1.0), Vec::Constant(1, 4.0), 1.0, 1.0, 4.0, 1.0};
    JointProblem c{Vec::Constant(1, 1.0), Vec::Constant(1, 4.0), 1.0, 1.0, 1.0, 1.0};
    const Vec q = Vec::Ones(1);
    const double da = optimal_d(8.0 * ln2, 0.0, q, a)[0];
    CHECK(da > 0.0);
    CHECK(optimal_d(8.0 * ln2, 0.0, q, b)[0] == doctest::Approx(da).epsilon(1e-13));
    CHECK(optimal_d(8.0 * ln2, 0.0, q, c)[0] != doctest::Approx(da));
}

TEST_CASE("joint dual root residual and bracket")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = random_instance(seed, 4);
        const auto& prob = inst.joint;
        const Vec q = Vec::Constant(4, prob.p_source / 4.0);
        for (double eps : {0.01, 0.3, 0.8}) {
            const double mu = dual_root_joint(eps, q, prob, 1e-10);
            CHECK(std::abs(dual_function_joint(mu, eps, q, prob)) <= 1e-8);
            double lower = INFINITY;
            for (int k = 0; k < 4; ++k) {
                const double s = (1.0 - eps) * prob.alpha[k] * q[k] / prob.sigma1_sq;
                lower = std::min(lower, 2.0 * ln2 * (1.0 + s) / (s * prob.beta[k] / prob.sigma2_sq));
            }
            CHECK(dual_function_joint(lower, eps, q, prob) > 0.0);
            CHECK(dual_function_joint(1e6 * mu, eps, q, prob) < 0.0);

            // The root exists for any positive rescaling of q.
            const double scaled = dual_root_joint(eps, 0.01 * q, prob, 1e-10);
            CHECK(std::abs(dual_function_joint(scaled, eps, 0.01 * q, prob)) <= 1e-8);
        }
    }
    const auto prob = random_instance(0, 2).joint;
    CHECK_THROWS_AS(dual_root_joint(0.3, Vec::Zero(2), prob, 1e-10), DegenerateBudget);
}

TEST_CASE("joint split update")
{
    const auto prob = unit_problem(2);
    CHECK(eps_update_joint(Vec::Zero(2), Vec::Ones(2), prob) == 0.0);
    CHECK(eps_update_joint(Vec::Ones(2), Vec::Ones(2), prob) == 1.0);
    const Vec d = Vec::Constant(2, 0.4);
    CHECK(eps_update_joint(0.5 * d, Vec::Ones(2), prob) ==
          doctest::Approx(0.5 * eps_update_joint(d, Vec::Ones(2), prob)));
    CHECK_THROWS_AS(eps_update_joint(d, Vec::Zero(2), prob), DegenerateBudget);
}

TEST_CASE("relay subproblem edge cases")
{
    const auto prob = random_instance(2, 3).joint;
    const auto idle = subproblem_a(Vec::Zero(3), prob);
    CHECK(idle.d.isZero());
    CHECK(idle.eps == 0.0);

    JointProblem sym{Vec::Constant(3, 50.0), Vec::Constant(3, 80.0), 1000.0, 1.0, 1.0, 0.5};
    const auto step = subproblem_a(Vec::Constant(3, 1000.0 / 3.0), sym);
    CHECK(step.d[0] == doctest::Approx(step.d[1]).epsilon(1e-12));
    CHECK(step.d[0] == doctest::Approx(step.d[2]).epsilon(1e-12));
}

TEST_CASE("relay subproblem spends the harvest at convergence")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto prob = random_instance(seed, 2).joint;
        const Vec q = Vec::Constant(2, prob.p_source / 2.0);
        const auto step = subproblem_a(q, prob);
        REQUIRE(step.converged);
        const double budget = step.eps * prob.eta * prob.alpha.dot(q);
        CHECK(std::abs(harvest_slack(q, step.d, step.eps, prob)) <= 1e-6 * budget);
        CHECK(relay_stationarity_residual(q, step.d, step.eps, step.mu, prob) <= 1e-9);
    }
}

TEST_CASE("source allocation at and above the activation threshold")
{
    // beta d / s2^2 = 1 and (1-eps) alpha / s1^2 = 1; mu_hat = 1 / (2 nu1) with nu2 = 0
    const auto prob = unit_problem(1);
    const Vec d = Vec::Ones(1);
    const auto at = optimal_q(1.0 / (4.0 * ln2), 0.0, 0.0, d, prob);
    REQUIRE(at);
    CHECK((*at)[0] == 0.0);
    const auto above = optimal_q(1.0 / (8.0 * ln2), 0.0, 0.0, d, prob);
    REQUIRE(above);
    CHECK((*above)[0] == doctest::Approx(0.5 * (std::sqrt(17.0) - 3.0)).epsilon(1e-13));
    const auto none = optimal_q(1.0, 0.0, 0.0, Vec::Zero(1), prob);
    REQUIRE(none);
    CHECK((*none)[0] == 0.0);
}

TEST_CASE("source allocation signals an unbounded mode")
{
    const auto prob = unit_problem(2);
    CHECK_FALSE(optimal_q(1.0, 10.0, 0.5, Vec::Ones(2), prob).has_value());
    CHECK_FALSE(optimal_q(0.0, 0.0, 0.5, Vec::Ones(2), prob).has_value());
}

TEST_CASE("activation level marks where a mode switches on")
{
    const auto prob = random_instance(3, 3).joint;
    const Vec d = Vec::Constant(3, 0.7);
    const double eps = 0.2;
    const Vec phi = activation_levels(eps, d, prob);
    for (int k = 0; k < 3; ++k) {
        const auto below = optimal_q(phi[k] * (1.0 + 1e-9), 0.0, eps, d, prob);
        const auto above = optimal_q(phi[k] * (1.0 - 1e-6), 0.0, eps, d, prob);
        CHECK((*below)[k] == 0.0);
        CHECK((*above)[k] > 0.0);
    }
}

TEST_CASE("dual decomposition meets both constraints")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto inst = random_instance(seed, seed % 3 + 2);
        const auto& prob = inst.joint;
        const Eigen::Index n = prob.alpha.size();
        const auto step = subproblem_a(Vec::Constant(n, prob.p_source / n), prob);
        for (auto growth : {DualGrowth::geometric, DualGrowth::additive}) {
            JointOptions opts;
            opts.growth = growth;
            opts.max_expansions = growth == DualGrowth::additive ? 100000 : 200;
            const auto res = dual_decomposition_q(step.d, step.eps, prob, opts);
            REQUIRE(res.feasible);
            CHECK(res.q.sum() <= prob.p_source * (1.0 + 1e-12));
            CHECK(std::abs(source_slack(res.q, prob)) <= 1e-6 * prob.p_source);
            const double harvest = step.eps * prob.eta * prob.alpha.dot(res.q);
            CHECK(harvest >= step.d.sum() * (1.0 - 1e-12));
            if (res.nu2 > 0.0)
                CHECK(std::abs(harvest_slack(res.q, step.d, step.eps, prob)) <= 1e-6 * harvest);
            CHECK(source_stationarity_residual(res.q, step.d, step.eps, res.nu1, res.nu2, prob) <=
                  1e-6);
        }
    }
}

TEST_CASE("single-mode dual decomposition puts all power on the mode")
{
    const auto inst = random_instance(4, 1);
    const auto& prob = inst.joint;
    const auto step = subproblem_a(Vec::Constant(1, prob.p_source), prob);
    const auto res = dual_decomposition_q(step.d, step.eps, prob);
    REQUIRE(res.feasible);
    CHECK(res.q[0] == doctest::Approx(prob.p_source).epsilon(1e-8));
}

TEST_CASE("symmetric problem keeps the source uniform")
{
    JointProblem sym{Vec::Constant(3, 40.0), Vec::Constant(3, 90.0), 1000.0, 2.0, 1.0, 0.6};
    const auto sol = solve_joint(sym);
    REQUIRE(sol.converged);
    CHECK((sol.q.maxCoeff() - sol.q.minCoeff()) <= 1e-4 * sol.q.maxCoeff());
}

TEST_CASE("joint solve: feasibility, monotone history, stationarity")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inst = random_instance(seed, 4);
        const auto& prob = inst.joint;
        const auto sol = solve_joint(prob);
        REQUIRE(sol.converged);
        for (std::size_t i = 1; i < sol.history.size(); ++i)
            CHECK(sol.history[i] >= sol.history[i - 1] - 1e-9);
        CHECK(sol.capacity == doctest::Approx(sol.history.back()));
        CHECK((sol.q.array() >= 0.0).all());
        CHECK((sol.d.array() >= 0.0).all());
        CHECK(sol.q.sum() <= prob.p_source + 1e-8);
        CHECK(harvest_slack(sol.q, sol.d, sol.eps, prob) >= -1e-8);
        CHECK(std::abs(source_slack(sol.q, prob)) <= 1e-6 * prob.p_source);
        CHECK(std::abs(harvest_slack(sol.q, sol.d, sol.eps, prob)) <= 1e-6 * sol.d.sum());
        CHECK(sol.nu1 > 0.0);
        CHECK(sol.nu2 > 0.0);
        CHECK(relay_stationarity_residual(sol.q, sol.d, sol.eps, sol.mu, prob) <= 1e-9);
        CHECK(source_stationarity_residual(sol.q, sol.d, sol.eps, sol.nu1, sol.nu2, prob) <= 1e-9);
        CHECK(sol.capacity == doctest::Approx(scalar_rate_joint(sol.q, sol.d, sol.eps, prob)));
    }
}

TEST_CASE("joint design never loses to the uniform source")
{
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inst = random_instance(seed, seed % 4 + 1);
        const double c1 = solve_fixed_q(inst.fixed).capacity;
        const double c2 = solve_joint(inst.joint).capacity;
        CHECK(c2 >= c1 - 1e-9);
    }
}

TEST_CASE("plain block alternation is monotone and dominates the uniform source")
{
    JointOptions plain;
    plain.coupled_refinement = false;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto inst = random_instance(seed, 3);
        const auto sol = solve_joint(inst.joint, plain);
        for (std::size_t i = 1; i < sol.history.size(); ++i)
            CHECK(sol.history[i] >= sol.history[i - 1] - 1e-9);
        CHECK(sol.capacity >= solve_fixed_q(inst.fixed).capacity - 1e-9);
        CHECK(sol.capacity <= solve_joint(inst.joint).capacity + 1e-6);
    }
}

TEST_CASE("coupled refinement keeps both constraints and does not lose rate")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto prob = random_instance(seed, 3).joint;
        const Vec q = Vec::Constant(3, prob.p_source / 3.0);
        const auto step = subproblem_a(q, prob);
        const double before = scalar_rate_joint(q, step.d, step.eps, prob);
        const auto c = coupled_refinement(q, step.d, step.eps, prob);
        CHECK(c.converged);
        CHECK(c.capacity >= before - 1e-12);
        CHECK(std::abs(source_slack(c.q, prob)) <= 1e-9 * prob.p_source);
        CHECK(std::abs(harvest_slack(c.q, c.d, step.eps, prob)) <= 1e-9 * c.d.sum());
    }
}

TEST_CASE("idle problem solves to zero")
{
    auto prob = random_instance(5, 2).joint;
    prob.eta = 0.0;
    const auto sol = solve_joint(prob);
    CHECK(sol.capacity == 0.0);
    CHECK(sol.d.isZero());
    CHECK(sol.converged);
}

TEST_CASE("close to the grid oracle on two modes")
{
    for (std::uint64_t seed = 200; seed < 202; ++seed) {
        const auto prob = random_instance(seed, 2).joint;
        const double gap = solve_joint(prob).capacity - oracle_joint(prob).capacity;
        CHECK(std::abs(gap) <= 5e-2);
    }
}

TEST_CASE("zero solution gives zero matrices")
{
    const auto inst = random_instance(6, 3);
    JointSolution sol;
    sol.q = Vec::Zero(3);
    sol.d = Vec::Zero(3);
    const auto m = build_joint_matrices(sol, inst.eig, inst.joint);
    CHECK(m.q.isZero());
    CHECK(m.f.isZero());
}

TEST_CASE("reconstructed matrices reproduce the scalar rate and power budgets")
{
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto inst = random_instance(seed, seed % 2 ? 4 : 3);
        const auto sol = solve_joint(inst.joint);
        const auto m = build_joint_matrices(sol, inst.eig, inst.joint);
        CHECK(relative_error(m.q.trace().real(), sol.q.sum()) <= 1e-9);
        CHECK((m.q - m.q.adjoint()).norm() <= 1e-12 * m.q.norm());
        CHECK(Eigen::SelfAdjointEigenSolver<CMat>(m.q).eigenvalues().minCoeff() >=
              -1e-9 * sol.q.maxCoeff());
        CHECK(relative_error(matrix_rate(inst.channel, m.q, m.f, sol.eps, inst.params),
                             sol.capacity) <= 1e-9);
        CHECK(relative_error(relay_transmit_power(inst.channel, m.q, m.f, sol.eps, inst.params),
                             harvested_power(inst.channel, m.q, sol.eps, inst.params)) <= 1e-6);
    }
}
