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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ehrelay/fixed_q.hpp"
#include "ehrelay/joint.hpp"
#include "ehrelay/matrix_model.hpp"
#include "ehrelay/oracle.hpp"
#include "instances.hpp"
#include "runner.hpp"

using namespace ehrelay;
using ehrelay::testing::random_instance;
using ehrelay::testing::relative_error;

namespace
{

struct Outcome
{
    bool pass = true;
    std::string detail;
};

std::string format(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string format(const char* pattern, ...)
{
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome oracle_fixed_q_check()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto inst = random_instance(1000 + i, 2);
        const double gap =
            solve_fixed_q(inst.fixed).capacity - oracle_fixed_q(inst.fixed).capacity;
        worst = std::max(worst, std::abs(gap));
    }
    const double t = seconds_since(t0);
    return {worst <= 5e-2 && t < 300.0,
            format("50 instances, max |gap| %.3e bits (bound 5e-2), %.1f s (bound 300 s)", worst, t)};
}

Outcome oracle_joint_check()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto inst = random_instance(2000 + i, 2);
        const double gap = solve_joint(inst.joint).capacity - oracle_joint(inst.joint).capacity;
        worst = std::max(worst, std::abs(gap));
    }
    const double t = seconds_since(t0);
    return {worst <= 5e-2 && t < 1800.0,
            format("20 instances, max |gap| %.3e bits (bound 5e-2), %.1f s (bound 1800 s)", worst, t)};
}

Outcome kkt_check()
{
    double stat1 = 0.0, tight1 = 0.0;
    double stat_d = 0.0, stat_q = 0.0, tight_p = 0.0, tight_h = 0.0;
    int unconverged = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto inst = random_instance(3000 + i, 4);
        const auto s1 = solve_fixed_q(inst.fixed);
        const auto s2 = solve_joint(inst.joint);
        unconverged += !s1.converged + !s2.converged;
        const auto& f = inst.fixed;
        const double budget = s1.eps * f.eta * f.rho2 * f.alpha.sum();
        stat1 = std::max(stat1, stationarity_residual_fixed_q(s1, f));
        tight1 = std::max(tight1, std::abs(energy_slack_fixed_q(s1.x, s1.eps, f)) / budget);

        const auto& j = inst.joint;
        stat_d = std::max(stat_d, relay_stationarity_residual(s2.q, s2.d, s2.eps, s2.mu, j));
        stat_q = std::max(stat_q,
                          source_stationarity_residual(s2.q, s2.d, s2.eps, s2.nu1, s2.nu2, j));
        tight_p = std::max(tight_p, std::abs(source_slack(s2.q, j)) / j.p_source);
        tight_h = std::max(tight_h, std::abs(harvest_slack(s2.q, s2.d, s2.eps, j)) /
                                        (s2.eps * j.eta * j.alpha.dot(s2.q)));
    }
    const bool pass = unconverged == 0 && stat1 <= 1e-9 && stat_d <= 1e-9 && stat_q <= 1e-9 &&
                      tight1 <= 1e-6 && tight_p <= 1e-6 && tight_h <= 1e-6;
    return {pass, format("100 instances D=4; stationarity x %.1e, d %.1e, q %.1e (bound 1e-9); "
                         "tightness energy %.1e, source %.1e, harvest %.1e (bound 1e-6); "
                         "unconverged %d",
                         stat1, stat_d, stat_q, tight1, tight_p, tight_h, unconverged)};
}

Outcome diagonalization_check()
{
    double rate1 = 0.0, power1 = 0.0, rate2 = 0.0, power2 = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto inst = random_instance(4000 + i, 2 + static_cast<int>(i % 3));
        const auto& p = inst.params;

        const auto s1 = solve_fixed_q(inst.fixed);
        const CMat f1 = build_relay_precoder(s1, inst.eig, p);
        rate1 = std::max(rate1, relative_error(matrix_rate_fixed_q(inst.channel, f1, s1.eps, p),
                                               s1.capacity));
        const auto snr = snr_pair(p);
        const CMat g = std::sqrt(p.sigma1_sq / p.sigma2_sq) * f1;
        const CMat hh = inst.channel.h1 * inst.channel.h1.adjoint();
        const Eigen::Index l = hh.rows();
        const double lhs =
            (g * (CMat::Identity(l, l) + (1.0 - s1.eps) * snr.rho1 * hh) * g.adjoint()).trace().real();
        power1 = std::max(power1, relative_error(lhs, p.eta * s1.eps * snr.rho2 * hh.trace().real()));

        const auto s2 = solve_joint(inst.joint);
        const auto m = build_joint_matrices(s2, inst.eig, inst.joint);
        rate2 = std::max(rate2, relative_error(matrix_rate(inst.channel, m.q, m.f, s2.eps, p),
                                               s2.capacity));
        power2 = std::max(power2,
                          relative_error(relay_transmit_power(inst.channel, m.q, m.f, s2.eps, p),
                                         harvested_power(inst.channel, m.q, s2.eps, p)));
    }
    const bool pass = rate1 <= 1e-9 && rate2 <= 1e-9 && power1 <= 1e-6 && power2 <= 1e-6;
    return {pass, format("100 instances; rate mismatch %.1e / %.1e (bound 1e-9); relay power "
                         "mismatch %.1e / %.1e (bound 1e-6)",
                         rate1, rate2, power1, power2)};
}

Outcome dominance_check()
{
    double worst = INFINITY;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto inst = random_instance(5000 + i, 4);
        worst = std::min(worst,
                         solve_joint(inst.joint).capacity - solve_fixed_q(inst.fixed).capacity);
    }
    return {worst >= -1e-9, format("100 instances, min(case2 - case1) %.3e bits (bound -1e-9)", worst)};
}

std::string figure_config(bool sigma1)
{
    return std::string("p_source_dbm = 30\nchannel_variance_dbm = 20\ntrials = 500\n"
                       "sweep_start_dbm = -20\nsweep_stop_dbm = 30\nsweep_step_dbm = 5\n") +
           (sigma1 ? "sweep_variable = sigma1_sq\nsigma2_sq_dbm = 0\n"
                   : "sweep_variable = sigma2_sq\nsigma1_sq_dbm = 10\n");
}

std::vector<runner::SweepRow> figure_sweep(bool sigma1, const char* csv_name, double& elapsed)
{
    std::istringstream text(figure_config(sigma1));
    const auto cfg = runner::parse_config(text);
    const auto t0 = std::chrono::steady_clock::now();
    auto rows = runner::run_sweep(cfg);
    elapsed = seconds_since(t0);
    std::ofstream out(csv_name, std::ios::binary);
    runner::write_sweep_csv(out, rows);
    return rows;
}

template <class Get>
bool strictly(const std::vector<runner::SweepRow>& rows, Get get, bool increasing)
{
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double a = get(rows[i - 1]), b = get(rows[i]);
        if (increasing ? !(b > a) : !(b < a))
            return false;
    }
    return true;
}

bool all_converged_and_dominant(const std::vector<runner::SweepRow>& rows, int trials)
{
    for (const auto& r : rows)
        if (r.trials_converged_case1 != trials || r.trials_converged_case2 != trials ||
            r.mean_capacity_case2 < r.mean_capacity_case1)
            return false;
    return true;
}

std::string endpoints(const std::vector<runner::SweepRow>& rows)
{
    const auto& a = rows.front();
    const auto& b = rows.back();
    return format("C1 %.2f->%.2f, C2 %.2f->%.2f, eps1 %.4f->%.4f, eps2 %.4f->%.4f",
                  a.mean_capacity_case1, b.mean_capacity_case1, a.mean_capacity_case2,
                  b.mean_capacity_case2, a.mean_eps_case1, b.mean_eps_case1, a.mean_eps_case2,
                  b.mean_eps_case2);
}

Outcome figure3_check()
{
    double t = 0.0;
    const auto rows = figure_sweep(true, "sweep_sigma1.csv", t);
    using R = runner::SweepRow;
    const bool cap = strictly(rows, [](const R& r) { return r.mean_capacity_case1; }, false) &&
                     strictly(rows, [](const R& r) { return r.mean_capacity_case2; }, false);
    const bool eps = strictly(rows, [](const R& r) { return r.mean_eps_case1; }, false) &&
                     strictly(rows, [](const R& r) { return r.mean_eps_case2; }, false);
    const bool dom = all_converged_and_dominant(rows, 500);
    return {cap && eps && dom && t < 600.0,
            format("sigma1^2 sweep, 500 trials: capacity decreasing %s, eps decreasing %s, "
                   "case2 >= case1 and all converged %s; %s; %.1f s (bound 600 s)",
                   cap ? "yes" : "no", eps ? "yes" : "no", dom ? "yes" : "no",
                   endpoints(rows).c_str(), t)};
}

Outcome figure4_check()
{
    double t = 0.0;
    const auto rows = figure_sweep(false, "sweep_sigma2.csv", t);
    using R = runner::SweepRow;
    const bool cap = strictly(rows, [](const R& r) { return r.mean_capacity_case1; }, false) &&
                     strictly(rows, [](const R& r) { return r.mean_capacity_case2; }, false);
    const bool eps = strictly(rows, [](const R& r) { return r.mean_eps_case1; }, true) &&
                     strictly(rows, [](const R& r) { return r.mean_eps_case2; }, true);
    const bool dom = all_converged_and_dominant(rows, 500);
    return {cap && eps && dom && t < 600.0,
            format("sigma2^2 sweep, 500 trials: capacity decreasing %s, eps increasing %s, "
                   "case2 >= case1 and all converged %s; %s; %.1f s (bound 600 s)",
                   cap ? "yes" : "no", eps ? "yes" : "no", dom ? "yes" : "no",
                   endpoints(rows).c_str(), t)};
}

std::string slurp(const char* path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism_check()
{
    {
        std::ofstream cfg("determinism.cfg");
        cfg << figure_config(true);
    }
    std::vector<std::string> outputs;
    for (const char* name : {"determinism_a.csv", "determinism_b.csv"}) {
        std::remove(name);
#ifdef EHRELAY_CLI
        const std::string cmd = std::string("\"") + EHRELAY_CLI +
                                "\" sweep --config determinism.cfg --seed 7 --output " + name;
        if (std::system(cmd.c_str()) != 0)
            return {false, "command line sweep failed"};
#else
        std::ifstream text("determinism.cfg");
        auto cfg = runner::parse_config(text);
        cfg.base_seed = 7;
        std::ofstream out(name, std::ios::binary);
        runner::write_sweep_csv(out, runner::run_sweep(cfg));
#endif
        outputs.push_back(slurp(name));
    }
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1];
    return {same, format("two sweeps with seed 7: %zu bytes each, %s", outputs[0].size(),
                         same ? "byte-identical" : "differ")};
}

Outcome mode_agreement_check()
{
    double eps_gap = 0.0, cap_gap = 0.0;
    int unconverged = 0;
    SplitOptions sweep;
    sweep.mode = SplitSearch::sweep;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto inst = random_instance(6000 + i, 4);
        const auto a = solve_fixed_q(inst.fixed);
        const auto b = solve_fixed_q(inst.fixed, sweep);
        unconverged += !a.converged + !b.converged;
        eps_gap = std::max(eps_gap, std::abs(a.eps - b.eps));
        cap_gap = std::max(cap_gap, std::abs(a.capacity - b.capacity));
    }
    return {eps_gap <= 2e-3 && cap_gap <= 1e-3 && unconverged == 0,
            format("50 instances, max |d eps| %.2e (bound 2e-3), max |d capacity| %.2e bits "
                   "(bound 1e-3), unconverged %d",
                   eps_gap, cap_gap, unconverged)};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"oracle equivalence, uniform source", oracle_fixed_q_check},
        {"oracle equivalence, joint design", oracle_joint_check},
        {"KKT residuals", kkt_check},
        {"diagonalization consistency", diagonalization_check},
        {"joint dominates uniform source", dominance_check},
        {"trend versus relay noise", figure3_check},
        {"trend versus destination noise", figure4_check},
        {"sweep determinism", determinism_check},
        {"split search mode agreement", mode_agreement_check},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failures += !out.pass;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first,
                    out.pass ? "PASS" : "FAIL", out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
