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

#include "ehrelay/fixed_q.hpp"
#include "ehrelay/joint.hpp"

namespace ehrelay
{

// Exhaustive grid maximizers for small mode counts. They evaluate the rate
// with their own code and search the budget sets as inequalities, so they
// serve as an independent reference for both solvers.

struct GridSpec
{
    int eps_steps = 101;     ///< grid points on eps in [0, 1]
    int simplex_steps = 61;  ///< grid points per allocation axis
    int refine_rounds = 3;   ///< local passes, each shrinking the box 4x

    void validate() const;
};

struct OracleFixedQ
{
    Vec x;
    double eps = 0.0;
    double capacity = 0.0;
};

struct OracleJoint
{
    Vec q;
    Vec d;
    double eps = 0.0;
    double capacity = 0.0;
};

/// Supports up to 3 modes.
OracleFixedQ oracle_fixed_q(const FixedQProblem& prob, const GridSpec& grid = {});

/// Supports up to 2 modes. p_source = 0 is accepted and yields zero.
OracleJoint oracle_joint(const JointProblem& prob, const GridSpec& grid = {});

} // namespace ehrelay
