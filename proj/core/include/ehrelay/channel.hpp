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

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

namespace ehrelay
{

using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

/// Link budget and array configuration. Powers are linear milliwatts.
struct SystemParams
{
    double p_source = 1000.0; ///< source power budget P
    double sigma1_sq = 1.0;   ///< noise power at the relay
    double sigma2_sq = 1.0;   ///< noise power at the destination
    double eta = 0.5;         ///< energy conversion efficiency, in [0, 1]
    int m_src = 4;            ///< source antennas
    int l_relay = 4;          ///< relay antennas
    int n_dst = 4;            ///< destination antennas
    int d_streams = 4;        ///< number of data streams D

    /// Throws InputError if any invariant is violated.
    void validate() const;
};

/// Source-to-relay (l_relay x m_src) and relay-to-destination
/// (n_dst x l_relay) channel matrices.
struct ChannelPair
{
    CMat h1;
    CMat h2;
};

/// Eigenmodes of both hops. Mode k of the first hop is paired with mode k
/// of the second hop, strongest with strongest.
///
/// alpha and beta hold the D largest squared singular values in descending
/// order; sigma1_diag and sigma2_diag keep the full singular value sets so
/// trace identities can be checked. The unitary factors are square:
/// h1 = u1 * S1 * v1^H and h2 = u2 * S2 * v2^H.
struct EigenSystem
{
    Vec alpha;
    Vec beta;
    CMat u1;
    CMat v1;
    CMat u2;
    CMat v2;
    Vec sigma1_diag;
    Vec sigma2_diag;

    int streams() const { return static_cast<int>(alpha.size()); }
};

/// Per-stream SNRs of the uniform-power source: rho1 = P/(D s1^2),
/// rho2 = P/(D s2^2).
struct SnrPair
{
    double rho1;
    double rho2;
};

SnrPair snr_pair(const SystemParams& params);

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

/// Entry statistics for generated channels. Without a K-factor every entry
/// is zero-mean circularly-symmetric complex Gaussian (Rayleigh). With a
/// K-factor a deterministic all-ones line-of-sight component carries
/// K/(K+1) of the per-entry power.
struct ChannelModel
{
    double entry_variance = 100.0;
    std::optional<double> rician_k;
};

/// Draws a channel pair from a 64-bit Mersenne Twister seeded with `seed`.
/// The Gaussian transform is implemented locally so draws are identical
/// across standard library implementations.
ChannelPair generate_channel_pair(std::uint64_t seed, const SystemParams& params,
                                  const ChannelModel& model);

/// Convenience overload for the Rayleigh model.
ChannelPair generate_channel_pair(std::uint64_t seed, const SystemParams& params,
                                  double entry_variance);

/// Throws InputError unless the matrices have the shapes implied by
/// `params` and every entry is finite.
void validate_channel(const ChannelPair& ch, const SystemParams& params);

/// SVD of both hops, truncated to `streams` modes. Rank-deficient channels
/// yield trailing zeros in alpha / beta.
EigenSystem decompose(const ChannelPair& ch, int streams);

/// Reads two `rows cols` blocks of `re:im` entries (h1 then h2). Blank
/// lines and `#` comments are skipped. Parse errors carry the line number.
ChannelPair read_channel_pair(std::istream& in);
ChannelPair load_channel_pair(const std::filesystem::path& path);
void write_channel_pair(std::ostream& out, const ChannelPair& ch);

} // namespace ehrelay
