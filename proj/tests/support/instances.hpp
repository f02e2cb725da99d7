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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "ehrelay/channel.hpp"
#include "ehrelay/fixed_q.hpp"
#include "ehrelay/joint.hpp"

namespace ehrelay::testing
{

// One random link: channel draw, noise levels spread over the simulated
// range, and both scalar problems on the same eigensystem.
struct Instance
{
    SystemParams params;
    ChannelPair channel;
    EigenSystem eig;
    FixedQProblem fixed;
    JointProblem joint;
};

inline Instance random_instance(std::uint64_t seed, int streams)
{
    std::mt19937_64 rng(0x5eedULL * 7919ULL + seed);
    std::uniform_real_distribution<double> level(-20.0, 30.0);
    std::uniform_real_distribution<double> efficiency(0.2, 1.0);

    Instance inst;
    inst.params.m_src = inst.params.l_relay = inst.params.n_dst = streams;
    inst.params.d_streams = streams;
    inst.params.p_source = dbm_to_mw(30.0);
    inst.params.sigma1_sq = dbm_to_mw(level(rng));
    inst.params.sigma2_sq = dbm_to_mw(level(rng));
    inst.params.eta = efficiency(rng);
    inst.channel = generate_channel_pair(seed, inst.params, dbm_to_mw(20.0));
    inst.eig = decompose(inst.channel, streams);
    inst.fixed = FixedQProblem::from(inst.eig, inst.params);
    inst.joint = JointProblem::from(inst.eig, inst.params);
    return inst;
}

inline double relative_error(double a, double b)
{
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

} // namespace ehrelay::testing
