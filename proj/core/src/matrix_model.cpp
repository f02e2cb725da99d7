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

#include "ehrelay/matrix_model.hpp"

#include <cmath>
#include <numbers>

#include "ehrelay/errors.hpp"

namespace ehrelay
{

namespace
{

void check_shapes(const ChannelPair& ch, const CMat& q, const CMat* f)
{
    if (q.rows() != ch.h1.cols() || q.cols() != ch.h1.cols())
        throw InputError("source covariance does not match the first-hop channel");
    if (f && (f->rows() != ch.h1.rows() || f->cols() != ch.h1.rows()))
        throw InputError("relay matrix does not match the relay array");
}

void check_eps(double eps)
{
    if (!(eps >= 0.0 && eps <= 1.0))
        throw InputError("power-splitting ratio must lie in [0, 1]");
}

// log2 det of a Hermitian positive definite matrix.
double log2det(const CMat& m)
{
    const CMat sym = 0.5 * (m + m.adjoint());
    Eigen::LLT<CMat> llt(sym);
    if (llt.info() != Eigen::Success)
        throw InputError("matrix is not positive definite");
    double sum = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        sum += std::log(l(i, i).real());
    return 2.0 * sum / std::numbers::ln2;
}

} // namespace

double matrix_rate(const ChannelPair& ch, const CMat& q, const CMat& f, double eps,
                   const SystemParams& params)
{
    check_shapes(ch, q, &f);
    check_eps(eps);
    const Eigen::Index n = ch.h2.rows();
    const CMat g = ch.h2 * f;
    const CMat noise = params.sigma2_sq * CMat::Identity(n, n) +
                       params.sigma1_sq * g * g.adjoint();
    const CMat signal = (1.0 - eps) * g * ch.h1 * q * ch.h1.adjoint() * g.adjoint();
    // det(I + S N^-1) = det(N + S) / det(N)
    return 0.5 * (log2det(noise + signal) - log2det(noise));
}

double relay_transmit_power(const ChannelPair& ch, const CMat& q, const CMat& f, double eps,
                            const SystemParams& params)
{
    check_shapes(ch, q, &f);
    check_eps(eps);
    const CMat received = ch.h1 * q * ch.h1.adjoint();
    return (params.sigma1_sq * f * f.adjoint() + (1.0 - eps) * f * received * f.adjoint())
        .trace()
        .real();
}

double harvested_power(const ChannelPair& ch, const CMat& q, double eps,
                       const SystemParams& params)
{
    check_shapes(ch, q, nullptr);
    check_eps(eps);
    return eps * params.eta * (ch.h1 * q * ch.h1.adjoint()).trace().real();
}

} // namespace ehrelay
