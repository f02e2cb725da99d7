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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrelay/channel.hpp"
#include "ehrelay/joint.hpp"
#include "ehrelay/oracle.hpp"
#include "ehrelay/split_kernel.hpp"

namespace ehrelay::runner
{

/// Malformed configuration text or a value outside its range. The message
/// carries the line number when one applies.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class SweepVariable
{
    sigma1_sq,
    sigma2_sq,
};

enum class ValidateCase
{
    fixed_q,
    joint,
    both,
};

/// Experiment settings. Powers are in dBm here and converted to linear
/// milliwatts only when building SystemParams.
struct ExperimentConfig
{
    double p_source_dbm = 30.0;
    double sigma1_sq_dbm = 0.0;
    double sigma2_sq_dbm = 0.0;
    double eta = 0.5;
    int m_src = 4;
    int l_relay = 4;
    int n_dst = 4;
    int d_streams = 4;

    double channel_variance_dbm = 20.0;
    std::optional<double> rician_k;

    int trials = 500;
    std::uint64_t base_seed = 1;
    SweepVariable sweep_variable = SweepVariable::sigma1_sq;
    double sweep_start_dbm = -20.0;
    double sweep_stop_dbm = 30.0;
    double sweep_step_dbm = 5.0;

    SplitSearch solver_mode = SplitSearch::fixed_point;
    double eps_threshold = 1e-3;
    double dual_tolerance = 1e-10;
    int max_iterations = 1000;
    double outer_threshold = 1e-3;
    int max_outer_iterations = 500;
    bool coupled_refinement = true;

    std::string output_path;

    int validate_instances = 20;
    ValidateCase validate_case = ValidateCase::both;
    double validate_tolerance = 5e-2;
    int oracle_eps_steps = 101;
    int oracle_simplex_steps = 61;
    int oracle_refine_rounds = 3;

    /// Throws ConfigError on any out-of-range value.
    void validate() const;

    SystemParams system_params() const;
    ChannelModel channel_model() const;
    SplitOptions split_options() const;
    JointOptions joint_options() const;
    GridSpec grid() const;
    /// Sweep points start, start + step, ... up to stop inclusive.
    std::vector<double> sweep_points() const;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys, repeated
/// keys and unparsable values are rejected.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Exact header of the sweep CSV.
extern const char* const kSweepHeader;

struct SweepRow
{
    double sweep_value_dbm = 0.0;
    double mean_capacity_case1 = 0.0;
    double mean_capacity_case2 = 0.0;
    double mean_eps_case1 = 0.0;
    double mean_eps_case2 = 0.0;
    int trials_converged_case1 = 0;
    int trials_converged_case2 = 0;
};

/// Monte Carlo sweep. Trial t of every sweep point uses seed base_seed + t,
/// so all points see the same channel draws. Means cover converged trials.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Solves one channel instance with both solvers and writes a `key = value`
/// report. Without a channel the instance is drawn from base_seed.
void run_solve(const ExperimentConfig& cfg, const std::optional<ChannelPair>& channel,
               std::ostream& out);

/// Cross-checks the solvers against the grid oracle on validate_instances
/// random draws. Returns true when every gap is within validate_tolerance.
bool run_validate(const ExperimentConfig& cfg, std::ostream& out);

} // namespace ehrelay::runner
