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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ehrelay/errors.hpp"
#include "runner.hpp"

namespace
{

enum Exit
{
    ok = 0,
    failed = 1,
    config_error = 2,
    numerical_error = 3,
    io_error = 4,
};

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string mode;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config, "key = value configuration file");
    cmd->add_option("--seed", c.seed, "base seed (overrides base_seed)");
    cmd->add_option("--output", c.output, "output path (overrides output_path)");
    cmd->add_option("--mode", c.mode, "split search: sweep or fixed_point")
        ->check(CLI::IsMember({"sweep", "fixed_point"}));
}

ehrelay::runner::ExperimentConfig resolve(const Common& c)
{
    using namespace ehrelay::runner;
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed)
        cfg.base_seed = *c.seed;
    if (!c.output.empty())
        cfg.output_path = c.output;
    if (!c.mode.empty())
        cfg.solver_mode =
            c.mode == "sweep" ? ehrelay::SplitSearch::sweep : ehrelay::SplitSearch::fixed_point;
    cfg.validate();
    return cfg;
}

// Writes to output_path when set, stdout otherwise.
template <class Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty()) {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw std::ios_base::failure("cannot open " + path + " for writing");
    fn(file);
    file.close();
    if (!file)
        throw std::ios_base::failure("failed writing " + path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Capacity optimization for power-splitting MIMO relays"};
    app.require_subcommand(1);

    Common solve_opts;
    std::string channel_file;
    auto* solve = app.add_subcommand("solve", "solve one channel instance with both solvers");
    add_common(solve, solve_opts);
    solve->add_option("--channel-file", channel_file, "channel pair in text form");

    Common sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over a noise power, CSV out");
    add_common(sweep, sweep_opts);

    Common validate_opts;
    auto* validate = app.add_subcommand("validate", "compare solvers with the grid oracle");
    add_common(validate, validate_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    using namespace ehrelay;
    try {
        if (solve->parsed()) {
            const auto cfg = resolve(solve_opts);
            std::optional<ChannelPair> ch;
            if (!channel_file.empty())
                ch = load_channel_pair(channel_file);
            with_output(cfg.output_path, [&](std::ostream& out) { runner::run_solve(cfg, ch, out); });
            return ok;
        }
        if (sweep->parsed()) {
            const auto cfg = resolve(sweep_opts);
            const auto rows = runner::run_sweep(cfg);
            with_output(cfg.output_path,
                        [&](std::ostream& out) { runner::write_sweep_csv(out, rows); });
            return ok;
        }
        const auto cfg = resolve(validate_opts);
        bool pass = false;
        with_output(cfg.output_path,
                    [&](std::ostream& out) { pass = runner::run_validate(cfg, out); });
        return pass ? ok : failed;
    } catch (const runner::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const InputError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return config_error;
    } catch (const BracketError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical_error;
    } catch (const DegenerateBudget& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical_error;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return io_error;
    }
}
