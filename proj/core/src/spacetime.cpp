// SPDX-License-Identifier: Apache-2.0
//
// strsma: space-time rate-splitting precoder lab for multibeam LEO downlinks
// Copyright (C) 2026 The strsma authors
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

#include "strsma/spacetime.hpp"
#include "strsma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace strsma
{

StBlock alamouti_encode(cdouble s1, cdouble s2)
{
    StBlock block;
    block.slot1 << s1, s2;
    block.slot2 << -std::conj(s2), std::conj(s1);
    return block;
}

Eigen::Vector2cd pair_channel(const CVec &h, const FeedPair &pair)
{
    if (pair.m < 0 || pair.n <= pair.m || pair.n >= h.size())
        throw InputError("feed pair out of range for channel of length " + std::to_string(h.size()));
    return {h(pair.m), h(pair.n)};
}

Eigen::Matrix2cd stacked_channel(const Eigen::Vector2cd &h)
{
    Eigen::Matrix2cd m;
    m << std::conj(h(0)), std::conj(h(1)), h(1), -h(0);
    return m;
}

Eigen::Matrix2cd combining_matrix(const Eigen::Vector2cd &h)
{
    Eigen::Matrix2cd m;
    m << h(0), std::conj(h(1)), h(1), -std::conj(h(0));
    return m;
}

std::pair<cdouble, cdouble> combine(cdouble y1, cdouble y2, const Eigen::Vector2cd &h_pair)
{
    const Eigen::Vector2cd stacked(y1, std::conj(y2));
    const Eigen::Vector2cd z = combining_matrix(h_pair) * stacked;
    return {z(0), z(1)};
}

double private_power_at(const CVec &h, const CMat &precoders)
{
    if (precoders.size() == 0)
        return 0.0;
    return (h.adjoint() * precoders).squaredNorm();
}

double common_rate_st(const CVec &h, const FeedPair &pair, double common_power, const CMat &precoders, double noise)
{
    if (common_power < 0.0)
        throw InputError("common power must be nonnegative");
    const double gain = pair_channel(h, pair).squaredNorm();
    return std::log2(1.0 + gain * 0.5 * common_power / (private_power_at(h, precoders) + noise));
}

double common_rate_beam(const CVec &h, const CVec &common_beam, const CMat &precoders, double noise)
{
    const double signal = std::norm(h.dot(common_beam));
    return std::log2(1.0 + signal / (private_power_at(h, precoders) + noise));
}

double private_rate(const CVec &h, const CMat &precoders, int k, double noise)
{
    if (k < 0 || k >= precoders.cols())
        throw InputError("private_rate: user index out of range");
    const Eigen::RowVectorXcd gains = h.adjoint() * precoders;
    const double signal = std::norm(gains(k));
    const double interference = gains.squaredNorm() - signal;
    return std::log2(1.0 + signal / (interference + noise));
}

double common_rate_for(const CVec &h, const PrecoderSolution &solution, double noise)
{
    switch (solution.mode)
    {
    case Mode::st_rsma:
        return common_rate_st(h, solution.pair, solution.common_power, solution.private_precoders, noise);
    case Mode::rsma:
    case Mode::multicast:
        return common_rate_beam(h, solution.common_beam, solution.private_precoders, noise);
    case Mode::sdma:
    case Mode::frr:
        return 0.0;
    }
    return 0.0;
}

RateReport saa_rates(const std::vector<CMat> &samples, const PrecoderSolution &solution, double noise)
{
    const int k_users = static_cast<int>(samples.size());
    if (k_users != solution.k_users())
        throw InputError("saa_rates: sample set and precoder disagree on user count");
    RateReport report;
    report.common = RVec::Zero(k_users);
    report.private_ = RVec::Zero(k_users);
    for (int k = 0; k < k_users; ++k)
    {
        const Eigen::Index n_samples = samples[k].cols();
        for (Eigen::Index s = 0; s < n_samples; ++s)
        {
            const CVec h = samples[k].col(s);
            report.common(k) += common_rate_for(h, solution, noise);
            report.private_(k) += private_rate(h, solution.private_precoders, k, noise);
        }
        report.common(k) /= static_cast<double>(n_samples);
        report.private_(k) /= static_cast<double>(n_samples);
    }
    report.portions = solution.common_portions.size() == k_users ? solution.common_portions : RVec::Zero(k_users);
    report.total = report.private_ + report.portions;
    return report;
}

RVec waterfill_portions(const RVec &private_rates, double budget)
{
    const Eigen::Index k_users = private_rates.size();
    RVec portions = RVec::Zero(k_users);
    if (k_users == 0 || !(budget > 0.0))
        return portions;
    std::vector<double> sorted(private_rates.data(), private_rates.data() + k_users);
    std::sort(sorted.begin(), sorted.end());
    // Find level L with sum_k max(0, L - r_k) = budget.
    double level = sorted.back() + budget / static_cast<double>(k_users);
    double prefix = 0.0;
    for (Eigen::Index i = 0; i < k_users; ++i)
    {
        prefix += sorted[i];
        const double candidate = (budget + prefix) / static_cast<double>(i + 1);
        const double next = (i + 1 < k_users) ? sorted[i + 1] : std::numeric_limits<double>::infinity();
        if (candidate <= next)
        {
            level = candidate;
            break;
        }
    }
    for (Eigen::Index k = 0; k < k_users; ++k)
        portions(k) = std::max(0.0, level - private_rates(k));
    return portions;
}

FeedPair select_feed_pair(const ChannelSet &channels)
{
    const int n_t = channels.n_t();
    if (n_t < 2)
        throw InputError("select_feed_pair: need at least two feeds");
    const int k_users = channels.k_users();
    if (static_cast<int>(channels.h_est.size()) != k_users || static_cast<int>(channels.error_cov.size()) != k_users)
        throw InputError("select_feed_pair: estimated channels and covariances required");

    FeedPair best{0, 1};
    double best_score = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < n_t; ++m)
        for (int n = m + 1; n < n_t; ++n)
        {
            double score = std::numeric_limits<double>::infinity();
            for (int k = 0; k < k_users; ++k)
            {
                const CVec &h = channels.h_est[k];
                const CMat &phi = channels.error_cov[k];
                const double expected = std::norm(h(m)) + std::norm(h(n)) + phi(m, m).real() + phi(n, n).real();
                score = std::min(score, expected);
            }
            if (score > best_score)
            {
                best_score = score;
                best = {m, n};
            }
        }
    return best;
}

std::pair<CVec, CVec> embed_common(const FeedPair &pair, const StBlock &block, int n_t)
{
    const RMat pi_matrix = pair.embed(n_t);
    return {pi_matrix.cast<cdouble>() * block.slot1, pi_matrix.cast<cdouble>() * block.slot2};
}

LinkMeasurement simulate_link(const ChannelSet &channels, const PrecoderSolution &solution, long n_blocks,
                              std::uint64_t seed, double noise)
{
    if (n_blocks < 1000)
        throw InputError("simulate_link: at least 1000 blocks required");
    const int k_users = channels.k_users();
    const int n_t = channels.n_t();
    if (solution.k_users() != k_users || solution.n_t() != n_t)
        throw InputError("simulate_link: solution dimensions do not match channels");
    const bool st = solution.mode == Mode::st_rsma;
    const bool beam = solution.mode == Mode::rsma || solution.mode == Mode::multicast;
    if (beam && solution.common_beam.size() != n_t)
        throw InputError("simulate_link: common beamformer missing");

    const CMat &P = solution.private_precoders;
    const double amp = std::sqrt(0.5 * solution.common_power);
    const double noise_amp = std::sqrt(noise);

    RVec common_signal = RVec::Zero(k_users), common_rest = RVec::Zero(k_users);
    RVec private_signal = RVec::Zero(k_users), private_rest = RVec::Zero(k_users);

    constexpr long chunk = 4096;
    const long n_chunks = (n_blocks + chunk - 1) / chunk;
    CVec s_priv1(k_users), s_priv2(k_users);
    for (long c = 0; c < n_chunks; ++c)
    {
        auto engine = make_engine(seed, Stream::link, {static_cast<std::uint64_t>(c)});
        const long blocks = std::min(chunk, n_blocks - c * chunk);
        for (long b = 0; b < blocks; ++b)
        {
            const cdouble sc1 = standard_cn(engine);
            const cdouble sc2 = standard_cn(engine);
            for (int j = 0; j < k_users; ++j)
            {
                s_priv1(j) = standard_cn(engine);
                s_priv2(j) = standard_cn(engine);
            }
            for (int k = 0; k < k_users; ++k)
            {
                const CVec &h = channels.h_true[k];
                const Eigen::RowVectorXcd gains = h.adjoint() * P;
                const cdouble n1 = noise_amp * standard_cn(engine);
                const cdouble n2 = noise_amp * standard_cn(engine);
                const cdouble own1 = gains(k) * s_priv1(k);
                const cdouble own2 = gains(k) * s_priv2(k);
                const cdouble priv1 = (gains * s_priv1)(0);
                const cdouble priv2 = (gains * s_priv2)(0);

                // private stage after ideal SIC, both slots decoded separately
                private_signal(k) += std::norm(own1) + std::norm(own2);
                private_rest(k) += std::norm(priv1 - own1 + n1) + std::norm(priv2 - own2 + n2);

                if (st)
                {
                    const Eigen::Vector2cd hp = pair_channel(h, solution.pair);
                    const StBlock block = alamouti_encode(sc1, sc2);
                    const auto [x1, x2] = embed_common(solution.pair, block, n_t);
                    const cdouble y1 = amp * h.dot(x1) + priv1 + n1;
                    const cdouble y2 = amp * h.dot(x2) + priv2 + n2;
                    const auto [z1, z2] = combine(y1, y2, hp);
                    const double g = hp.squaredNorm();
                    const cdouble sig1 = g * amp * sc1;
                    const cdouble sig2 = g * amp * sc2;
                    common_signal(k) += std::norm(sig1) + std::norm(sig2);
                    common_rest(k) += std::norm(z1 - sig1) + std::norm(z2 - sig2);
                }
                else if (beam)
                {
                    const cdouble hc = h.dot(solution.common_beam);
                    common_signal(k) += std::norm(hc * sc1) + std::norm(hc * sc2);
                    common_rest(k) += std::norm(priv1 + n1) + std::norm(priv2 + n2);
                }
            }
        }
    }

    LinkMeasurement m;
    m.blocks = n_blocks;
    m.common_sinr.resize(k_users);
    m.private_sinr.resize(k_users);
    m.common_saturated.assign(k_users, false);
    m.private_saturated.assign(k_users, false);
    const double inf = std::numeric_limits<double>::infinity();
    // residual at rounding level (SINR above 200 dB) counts as interference-free
    constexpr double floor = 1e-20;
    for (int k = 0; k < k_users; ++k)
    {
        m.common_saturated[k] = common_signal(k) > 0.0 && common_rest(k) <= floor * common_signal(k);
        m.common_sinr(k) = m.common_saturated[k] ? inf : (common_rest(k) > 0.0 ? common_signal(k) / common_rest(k) : 0.0);
        m.private_saturated[k] = private_signal(k) > 0.0 && private_rest(k) <= floor * private_signal(k);
        m.private_sinr(k) =
            m.private_saturated[k] ? inf : (private_rest(k) > 0.0 ? private_signal(k) / private_rest(k) : 0.0);
    }
    return m;
}

} // namespace strsma
