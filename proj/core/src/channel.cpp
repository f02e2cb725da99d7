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

#include "ehrelay/channel.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ehrelay/errors.hpp"

namespace ehrelay
{

void SystemParams::validate() const
{
    if (!(p_source > 0.0) || !std::isfinite(p_source))
        throw InputError("p_source must be positive and finite");
    if (!(sigma1_sq > 0.0) || !std::isfinite(sigma1_sq))
        throw InputError("sigma1_sq must be positive and finite");
    if (!(sigma2_sq > 0.0) || !std::isfinite(sigma2_sq))
        throw InputError("sigma2_sq must be positive and finite");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InputError("eta must lie in [0, 1]");
    if (m_src < 1 || l_relay < 1 || n_dst < 1)
        throw InputError("antenna counts must be at least 1");
    if (d_streams < 1 || d_streams > std::min({m_src, l_relay, n_dst}))
        throw InputError("d_streams must lie in [1, min(m_src, l_relay, n_dst)]");
}

SnrPair snr_pair(const SystemParams& params)
{
    const double per_stream = params.p_source / params.d_streams;
    return {per_stream / params.sigma1_sq, per_stream / params.sigma2_sq};
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

namespace
{

// Box-Muller over raw 64-bit draws; avoids std::normal_distribution, whose
// output is implementation-defined.
class ComplexGaussian
{
public:
    explicit ComplexGaussian(std::uint64_t seed) : engine_(seed) {}

    std::complex<double> operator()(double variance)
    {
        const double u1 = open_unit();
        const double u2 = open_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        const double scale = std::sqrt(variance / 2.0);
        return {scale * radius * std::cos(angle), scale * radius * std::sin(angle)};
    }

private:
    double open_unit()
    {
        // 53 random mantissa bits, shifted off zero.
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
};

CMat draw_matrix(ComplexGaussian& gauss, int rows, int cols, const ChannelModel& model)
{
    CMat h(rows, cols);
    double scatter_variance = model.entry_variance;
    double los_amplitude = 0.0;
    if (model.rician_k) {
        const double k = *model.rician_k;
        scatter_variance = model.entry_variance / (k + 1.0);
        los_amplitude = std::sqrt(model.entry_variance * k / (k + 1.0));
    }
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            h(r, c) = los_amplitude + gauss(scatter_variance);
    return h;
}

void check_finite(const CMat& m, const char* name)
{
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const auto z = m.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw InputError(std::string(name) + " has a non-finite entry");
    }
}

} // namespace

ChannelPair generate_channel_pair(std::uint64_t seed, const SystemParams& params,
                                  const ChannelModel& model)
{
    params.validate();
    if (!(model.entry_variance > 0.0))
        throw InputError("entry_variance must be positive");
    if (model.rician_k && !(*model.rician_k >= 0.0))
        throw InputError("Rician K-factor must be non-negative");

    ComplexGaussian gauss(seed);
    ChannelPair ch;
    ch.h1 = draw_matrix(gauss, params.l_relay, params.m_src, model);
    ch.h2 = draw_matrix(gauss, params.n_dst, params.l_relay, model);
    return ch;
}

ChannelPair generate_channel_pair(std::uint64_t seed, const SystemParams& params,
                                  double entry_variance)
{
    return generate_channel_pair(seed, params, ChannelModel{entry_variance, std::nullopt});
}

void validate_channel(const ChannelPair& ch, const SystemParams& params)
{
    if (ch.h1.rows() != params.l_relay || ch.h1.cols() != params.m_src)
        throw InputError("h1 must be l_relay x m_src");
    if (ch.h2.rows() != params.n_dst || ch.h2.cols() != params.l_relay)
        throw InputError("h2 must be n_dst x l_relay");
    check_finite(ch.h1, "h1");
    check_finite(ch.h2, "h2");
}

EigenSystem decompose(const ChannelPair& ch, int streams)
{
    check_finite(ch.h1, "h1");
    check_finite(ch.h2, "h2");
    if (ch.h2.cols() != ch.h1.rows())
        throw InputError("h2 columns must match h1 rows (relay antennas)");
    const auto modes1 = std::min(ch.h1.rows(), ch.h1.cols());
    const auto modes2 = std::min(ch.h2.rows(), ch.h2.cols());
    if (streams < 1 || streams > modes1 || streams > modes2)
        throw InputError("stream count exceeds the number of channel modes");

    Eigen::JacobiSVD<CMat> svd1(ch.h1, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::JacobiSVD<CMat> svd2(ch.h2, Eigen::ComputeFullU | Eigen::ComputeFullV);

    EigenSystem eig;
    eig.u1 = svd1.matrixU();
    eig.v1 = svd1.matrixV();
    eig.u2 = svd2.matrixU();
    eig.v2 = svd2.matrixV();
    eig.sigma1_diag = svd1.singularValues();
    eig.sigma2_diag = svd2.singularValues();
    eig.alpha = eig.sigma1_diag.head(streams).array().square();
    eig.beta = eig.sigma2_diag.head(streams).array().square();
    return eig;
}

namespace
{

struct LineReader
{
    std::istream& in;
    int line_no = 0;

    // Next non-blank, non-comment line; false at end of stream.
    bool next(std::string& out)
    {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            if (hash != std::string::npos)
                raw.erase(hash);
            if (raw.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            out = raw;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw InputError("channel file line " + std::to_string(line_no) + ": " + what);
    }
};

std::complex<double> parse_entry(const std::string& token, const LineReader& reader)
{
    const auto colon = token.find(':');
    if (colon == std::string::npos)
        reader.fail("expected re:im, got '" + token + "'");
    auto number = [&](const char* first, const char* last) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last)
            reader.fail("cannot parse '" + token + "'");
        if (!std::isfinite(value))
            reader.fail("non-finite entry '" + token + "'");
        return value;
    };
    const char* begin = token.data();
    return {number(begin, begin + colon), number(begin + colon + 1, begin + token.size())};
}

CMat read_block(LineReader& reader, const char* name)
{
    std::string line;
    if (!reader.next(line))
        throw InputError(std::string("channel file: missing ") + name + " block");
    std::istringstream header(line);
    long rows = 0;
    long cols = 0;
    std::string extra;
    if (!(header >> rows >> cols) || (header >> extra) || rows < 1 || cols < 1)
        reader.fail(std::string("expected '<rows> <cols>' header for ") + name);

    CMat m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        if (!reader.next(line))
            throw InputError(std::string("channel file: ") + name + " ends after " +
                             std::to_string(r) + " of " + std::to_string(rows) + " rows");
        std::istringstream row(line);
        std::string token;
        long c = 0;
        while (row >> token) {
            if (c >= cols)
                reader.fail("too many entries in row");
            m(r, c++) = parse_entry(token, reader);
        }
        if (c != cols)
            reader.fail("expected " + std::to_string(cols) + " entries, got " +
                        std::to_string(c));
    }
    return m;
}

} // namespace

ChannelPair read_channel_pair(std::istream& in)
{
    LineReader reader{in};
    ChannelPair ch;
    ch.h1 = read_block(reader, "h1");
    ch.h2 = read_block(reader, "h2");
    std::string trailing;
    if (reader.next(trailing))
        reader.fail("unexpected content after the h2 block");
    if (ch.h2.cols() != ch.h1.rows())
        throw InputError("channel file: h2 columns must equal h1 rows");
    return ch;
}

ChannelPair load_channel_pair(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open channel file " + path.string());
    return read_channel_pair(in);
}

void write_channel_pair(std::ostream& out, const ChannelPair& ch)
{
    char buf[64];
    for (const CMat* m : {&ch.h1, &ch.h2}) {
        out << m->rows() << ' ' << m->cols() << '\n';
        for (Eigen::Index r = 0; r < m->rows(); ++r) {
            for (Eigen::Index c = 0; c < m->cols(); ++c) {
                const auto z = (*m)(r, c);
                std::snprintf(buf, sizeof buf, "%.17g:%.17g", z.real(), z.imag());
                out << (c ? " " : "") << buf;
            }
            out << '\n';
        }
    }
}

} // namespace ehrelay
