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

#include "ehrelay/channel.hpp"

namespace ehrelay
{

// Matrix-level link model of the two-hop amplify-and-forward relay with a
// power-splitting receiver at the relay. These evaluators take arbitrary
// source covariances Q (m_src x m_src) and relay matrices F
// (l_relay x l_relay) and are the reference against which the
// diagonalized scalar solvers are checked.

/// End-to-end rate in bits per channel use, including the 1/2 factor of
/// the two-phase protocol:
///   1/2 log2 det(I + (1-eps) H2 F H1 Q H1^H F^H H2^H Rn^-1),
///   Rn = s2^2 I + s1^2 H2 F F^H H2^H.
double matrix_rate(const ChannelPair& ch, const CMat& q, const CMat& f, double eps,
                   const SystemParams& params);

/// Relay transmit power tr(s1^2 F F^H + (1-eps) F H1 Q H1^H F^H).
double relay_transmit_power(const ChannelPair& ch, const CMat& q, const CMat& f, double eps,
                            const SystemParams& params);

/// Power available to the relay after conversion: eps * eta * tr(H1 Q H1^H).
/// Antenna noise is not harvested.
double harvested_power(const ChannelPair& ch, const CMat& q, double eps,
                       const SystemParams& params);

} // namespace ehrelay
