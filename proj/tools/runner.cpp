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

#include "runner.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "ehrelay/errors.hpp"
#include "ehrelay/fixed_q.hpp"
#include "ehrelay/matrix_model.hpp"

namespace ehrelay::runner
{

const char* const kSweepHeader = "sweep_value_dbm,mean_capacity_case1,mean_capacity_case2,"
                                 "mean_eps_case1,mean_eps_case2,trials_converged_case1,"
                                 "trials_converged_case2";

namespace
{

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& text)
{
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("'" + text + "' is not a valid number");
    return value;
}

bool parse_bool(const std::string& text)
{
    if (text == "true" || text == "1")
        return true;
    if (text == "false" || text == "0")
        return false;
    throw ConfigError("'" + text + "' is not true or false");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

template <class T>
Setter number(T ExperimentConfig::*field)
{
    return [field](ExperimentConfig& c, const std::string& v) { c.*field = parse_number<T>(v); };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"p_source_dbm", number(&ExperimentConfig::p_source_dbm)},
        {"sigma1_sq_dbm", number(&ExperimentConfig::sigma1_sq_dbm)},
        {"sigma2_sq_dbm", number(&ExperimentConfig::sigma2_sq_dbm)},
        {"eta", number(&ExperimentConfig::eta)},
        {"m_src", number(&ExperimentConfig::m_src)},
        {"l_relay", number(&ExperimentConfig::l_relay)},
        {"n_dst", number(&ExperimentConfig::n_dst)},
        {"d_streams", number(&ExperimentConfig::d_streams)},
        {"channel_variance_dbm", number(&ExperimentConfig::channel_variance_dbm)},
        {"rician_k",
         [](ExperimentConfig& c, const std::string& v) { c.rician_k = parse_number<double>(v); }},
        {"trials", number(&ExperimentConfig::trials)},
        {"base_seed", number(&ExperimentConfig::base_seed)},
        {"sweep_variable",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "sigma1_sq")
                 c.sweep_variable = SweepVariable::sigma1_sq;
             else if (v == "sigma2_sq")
                 c.sweep_variable = SweepVariable::sigma2_sq;
             else
                 throw ConfigError("sweep_variable must be sigma1_sq or sigma2_sq");
         }},
        {"sweep_start_dbm", number(&ExperimentConfig::sweep_start_dbm)},
        {"sweep_stop_dbm", number(&ExperimentConfig::sweep_stop_dbm)},
        {"sweep_step_dbm", number(&ExperimentConfig::sweep_step_dbm)},
        {"solver_mode",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "sweep")
                 c.solver_mode = SplitSearch::sweep;
             else if (v == "fixed_point")
                 c.solver_mode = SplitSearch::fixed_point;
             else
                 throw ConfigError("solver_mode must be sweep or fixed_point");
         }},
        {"eps_threshold", number(&ExperimentConfig::eps_threshold)},
        {"dual_tolerance", number(&ExperimentConfig::dual_tolerance)},
        {"max_iterations", number(&ExperimentConfig::max_iterations)},
        {"outer_threshold", number(&ExperimentConfig::outer_threshold)},
        {"max_outer_iterations", number(&ExperimentConfig::max_outer_iterations)},
        {"coupled_refinement",
         [](ExperimentConfig& c, const std::string& v) { c.coupled_refinement = parse_bool(v); }},
        {"output_path", [](ExperimentConfig& c, const std::string& v) { c.output_path = v; }},
        {"validate_instances", number(&ExperimentConfig::validate_instances)},
        {"validate_case",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "fixed_q")
                 c.validate_case = ValidateCase::fixed_q;
             else if (v == "joint")
                 c.validate_case = ValidateCase::joint;
             else if (v == "both")
                 c.validate_case = ValidateCase::both;
             else
                 throw ConfigError("validate_case must be fixed_q, joint or both");
         }},
        {"validate_tolerance", number(&ExperimentConfig::validate_tolerance)},
        {"oracle_eps_steps", number(&ExperimentConfig::oracle_eps_steps)},
        {"oracle_simplex_steps", number(&ExperimentConfig::oracle_simplex_steps)},
        {"oracle_refine_rounds", number(&ExperimentConfig::oracle_refine_rounds)},
    };
    return table;
}

void require(bool ok, const char* message)
{
    if (!ok)
        throw ConfigError(message);
}

std::string fmt(const char* pattern, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

std::string join(const Vec& v)
{
    std::string out;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (k)
            out += ' ';
        out += fmt("%.12g", v[k]);
    }
    return out;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

} // namespace

void ExperimentConfig::validate() const
{
    require(std::isfinite(p_source_dbm) && std::isfinite(sigma1_sq_dbm) &&
                std::isfinite(sigma2_sq_dbm) && std::isfinite(channel_variance_dbm),
            "power levels must be finite");
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    require(m_src >= 1 && l_relay >= 1 && n_dst >= 1, "antenna counts must be at least 1");
    require(d_streams >= 1 && d_streams <= std::min({m_src, l_relay, n_dst}),
            "d_streams must lie in [1, min(m_src, l_relay, n_dst)]");
    require(!rician_k || (std::isfinite(*rician_k) && *rician_k >= 0.0),
            "rician_k must be non-negative");
    require(trials >= 1, "trials must be at least 1");
    require(std::isfinite(sweep_step_dbm) && sweep_step_dbm > 0.0, "sweep_step_dbm must be positive");
    require(std::isfinite(sweep_start_dbm) && std::isfinite(sweep_stop_dbm) &&
                sweep_stop_dbm >= sweep_start_dbm,
            "sweep range must be non-empty");
    require(eps_threshold > 0.0 && dual_tolerance > 0.0 && outer_threshold > 0.0,
            "thresholds must be positive");
    require(max_iterations >= 1 && max_outer_iterations >= 1, "iteration caps must be at least 1");
    require(validate_instances >= 1, "validate_instances must be at least 1");
    require(validate_tolerance > 0.0, "validate_tolerance must be positive");
    require(oracle_eps_steps >= 2 && oracle_simplex_steps >= 2 && oracle_refine_rounds >= 0,
            "oracle grid needs at least 2 points per axis");
}

SystemParams ExperimentConfig::system_params() const
{
    SystemParams p;
    p.p_source = dbm_to_mw(p_source_dbm);
    p.sigma1_sq = dbm_to_mw(sigma1_sq_dbm);
    p.sigma2_sq = dbm_to_mw(sigma2_sq_dbm);
    p.eta = eta;
    p.m_src = m_src;
    p.l_relay = l_relay;
    p.n_dst = n_dst;
    p.d_streams = d_streams;
    return p;
}

ChannelModel ExperimentConfig::channel_model() const
{
    return {dbm_to_mw(channel_variance_dbm), rician_k};
}

SplitOptions ExperimentConfig::split_options() const
{
    SplitOptions o;
    o.mode = solver_mode;
    o.threshold = eps_threshold;
    o.max_iterations = max_iterations;
    o.dual_tolerance = dual_tolerance;
    return o;
}

JointOptions ExperimentConfig::joint_options() const
{
    JointOptions o;
    o.split = split_options();
    o.threshold = outer_threshold;
    o.max_outer = max_outer_iterations;
    o.coupled_refinement = coupled_refinement;
    return o;
}

GridSpec ExperimentConfig::grid() const
{
    return {oracle_eps_steps, oracle_simplex_steps, oracle_refine_rounds};
}

std::vector<double> ExperimentConfig::sweep_points() const
{
    const auto count =
        static_cast<int>(std::floor((sweep_stop_dbm - sweep_start_dbm) / sweep_step_dbm + 1e-9));
    std::vector<double> points;
    for (int i = 0; i <= count; ++i)
        points.push_back(sweep_start_dbm + i * sweep_step_dbm);
    return points;
}

ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(where + "repeated key '" + key + "'");
        if (value.empty())
            throw ConfigError(where + "missing value for '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open config file " + path.string());
    return parse_config(in);
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto model = cfg.channel_model();
    const auto split = cfg.split_options();
    const auto joint = cfg.joint_options();

    std::vector<SweepRow> rows;
    for (const double point : cfg.sweep_points()) {
        ExperimentConfig at = cfg;
        (cfg.sweep_variable == SweepVariable::sigma1_sq ? at.sigma1_sq_dbm : at.sigma2_sq_dbm) =
            point;
        const auto params = at.system_params();

        SweepRow row;
        row.sweep_value_dbm = point;
        for (int t = 0; t < cfg.trials; ++t) {
            const auto ch = generate_channel_pair(cfg.base_seed + static_cast<std::uint64_t>(t),
                                                  params, model);
            const auto eig = decompose(ch, params.d_streams);
            const auto s1 = solve_fixed_q(FixedQProblem::from(eig, params), split);
            const auto s2 = solve_joint(JointProblem::from(eig, params), joint);
            if (s1.converged) {
                row.mean_capacity_case1 += s1.capacity;
                row.mean_eps_case1 += s1.eps;
                ++row.trials_converged_case1;
            }
            if (s2.converged) {
                row.mean_capacity_case2 += s2.capacity;
                row.mean_eps_case2 += s2.eps;
                ++row.trials_converged_case2;
            }
        }
        const double nan = std::nan("");
        const int n1 = row.trials_converged_case1;
        const int n2 = row.trials_converged_case2;
        row.mean_capacity_case1 = n1 ? row.mean_capacity_case1 / n1 : nan;
        row.mean_eps_case1 = n1 ? row.mean_eps_case1 / n1 : nan;
        row.mean_capacity_case2 = n2 ? row.mean_capacity_case2 / n2 : nan;
        row.mean_eps_case2 = n2 ? row.mean_eps_case2 / n2 : nan;
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.6g,%.12g,%.12g,%.12g,%.12g,%d,%d\n", r.sweep_value_dbm,
                      r.mean_capacity_case1, r.mean_capacity_case2, r.mean_eps_case1,
                      r.mean_eps_case2, r.trials_converged_case1, r.trials_converged_case2);
        out << buf;
    }
    if (!out)
        throw std::ios_base::failure("failed writing sweep CSV");
}

void run_solve(const ExperimentConfig& cfg, const std::optional<ChannelPair>& channel,
               std::ostream& out)
{
    cfg.validate();
    const auto params = cfg.system_params();
    const ChannelPair ch =
        channel ? *channel : generate_channel_pair(cfg.base_seed, params, cfg.channel_model());
    validate_channel(ch, params);
    const auto eig = decompose(ch, params.d_streams);

    const auto fp = FixedQProblem::from(eig, params);
    const auto s1 = solve_fixed_q(fp, cfg.split_options());
    const auto jp = JointProblem::from(eig, params);
    const auto s2 = solve_joint(jp, cfg.joint_options());

    const CMat f1 = build_relay_precoder(s1, eig, params);
    const auto m2 = build_joint_matrices(s2, eig, jp);

    out << "source = " << (channel ? "channel file" : "seed " + std::to_string(cfg.base_seed))
        << '\n';
    out << "streams = " << params.d_streams << '\n';
    out << "alpha = " << join(eig.alpha) << '\n';
    out << "beta = " << join(eig.beta) << '\n';

    out << "\n[case1]\n";
    out << "capacity_bits = " << fmt("%.12g", s1.capacity) << '\n';
    out << "eps = " << fmt("%.12g", s1.eps) << '\n';
    out << "mu = " << fmt("%.12g", s1.mu) << '\n';
    out << "x = " << join(s1.x) << '\n';
    out << "energy_slack = " << fmt("%.3e", energy_slack_fixed_q(s1.x, s1.eps, fp)) << '\n';
    out << "stationarity_residual = " << fmt("%.3e", stationarity_residual_fixed_q(s1, fp))
        << '\n';
    out << "matrix_rate_bits = " << fmt("%.12g", matrix_rate_fixed_q(ch, f1, s1.eps, params))
        << '\n';
    out << "converged = " << yes_no(s1.converged) << '\n';
    out << "iterations = " << s1.iterations << '\n';

    out << "\n[case2]\n";
    out << "capacity_bits = " << fmt("%.12g", s2.capacity) << '\n';
    out << "eps = " << fmt("%.12g", s2.eps) << '\n';
    out << "nu1 = " << fmt("%.12g", s2.nu1) << '\n';
    out << "nu2 = " << fmt("%.12g", s2.nu2) << '\n';
    out << "q = " << join(s2.q) << '\n';
    out << "d = " << join(s2.d) << '\n';
    out << "source_slack = " << fmt("%.3e", source_slack(s2.q, jp)) << '\n';
    out << "harvest_slack = " << fmt("%.3e", harvest_slack(s2.q, s2.d, s2.eps, jp)) << '\n';
    out << "relay_stationarity_residual = "
        << fmt("%.3e", relay_stationarity_residual(s2.q, s2.d, s2.eps, s2.mu, jp)) << '\n';
    out << "source_stationarity_residual = "
        << fmt("%.3e", source_stationarity_residual(s2.q, s2.d, s2.eps, s2.nu1, s2.nu2, jp))
        << '\n';
    out << "matrix_rate_bits = " << fmt("%.12g", matrix_rate(ch, m2.q, m2.f, s2.eps, params))
        << '\n';
    out << "converged = " << yes_no(s2.converged) << '\n';
    out << "outer_iterations = " << s2.iterations << '\n';
    if (!out)
        throw std::ios_base::failure("failed writing solve report");
}

bool run_validate(const ExperimentConfig& cfg, std::ostream& out)
{
    cfg.validate();
    if (cfg.d_streams > 2)
        throw InputError("validate supports d_streams <= 2");
    const auto params = cfg.system_params();
    const auto grid = cfg.grid();
    const bool do_fixed = cfg.validate_case != ValidateCase::joint;
    const bool do_joint = cfg.validate_case != ValidateCase::fixed_q;

    double worst_fixed = 0.0;
    double worst_joint = 0.0;
    for (int i = 0; i < cfg.validate_instances; ++i) {
        const auto seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        const auto ch = generate_channel_pair(seed, params, cfg.channel_model());
        const auto eig = decompose(ch, params.d_streams);
        char buf[160];
        if (do_fixed) {
            const auto prob = FixedQProblem::from(eig, params);
            const double solver = solve_fixed_q(prob, cfg.split_options()).capacity;
            const double oracle = oracle_fixed_q(prob, grid).capacity;
            worst_fixed = std::max(worst_fixed, std::abs(solver - oracle));
            std::snprintf(buf, sizeof buf, "fixed_q seed=%llu solver=%.9f oracle=%.9f gap=%.3e\n",
                          static_cast<unsigned long long>(seed), solver, oracle, solver - oracle);
            out << buf;
        }
        if (do_joint) {
            const auto prob = JointProblem::from(eig, params);
            const double solver = solve_joint(prob, cfg.joint_options()).capacity;
            const double oracle = oracle_joint(prob, grid).capacity;
            worst_joint = std::max(worst_joint, std::abs(solver - oracle));
            std::snprintf(buf, sizeof buf, "joint seed=%llu solver=%.9f oracle=%.9f gap=%.3e\n",
                          static_cast<unsigned long long>(seed), solver, oracle, solver - oracle);
            out << buf;
        }
    }

    const double tol = cfg.validate_tolerance;
    bool pass = true;
    auto verdict = [&](const char* name, double worst) {
        const bool ok = worst <= tol;
        pass = pass && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s max_gap=%.3e bound=%.3e %s\n", name, worst, tol,
                      ok ? "PASS" : "FAIL");
        out << buf;
    };
    if (do_fixed)
        verdict("fixed_q", worst_fixed);
    if (do_joint)
        verdict("joint", worst_joint);
    return pass;
}

} // namespace ehrelay::runner
