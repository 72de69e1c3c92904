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

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "strsma/rng.hpp"
#include "strsma/spacetime.hpp"

using namespace strsma;

namespace
{
ChannelSet perfect(const std::vector<CVec> &h)
{
    ChannelSet c;
    for (const auto &v : h)
    {
        c.h_true.push_back(v);
        c.h_est.push_back(v);
        c.error_cov.push_back(CMat::Zero(v.size(), v.size()));
    }
    return c;
}
} // namespace

TEST_CASE("Alamouti encoding and combining")
{
    const StBlock b = alamouti_encode({1.0, 2.0}, {-0.5, 0.25});
    CHECK(b.slot1(0) == cdouble(1.0, 2.0));
    CHECK(b.slot1(1) == cdouble(-0.5, 0.25));
    CHECK(b.slot2(0) == cdouble(0.5, 0.25));
    CHECK(b.slot2(1) == cdouble(1.0, -2.0));

    auto engine = make_engine(2, Stream::test);
    for (int t = 0; t < 200; ++t)
    {
        const Eigen::Vector2cd h = oracle::random_cn(engine, 2, 3.0);
        const Eigen::Matrix2cd eff = combining_matrix(h) * stacked_channel(h);
        CHECK((eff - h.squaredNorm() * Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= 1e-12 * h.squaredNorm());

        // noiseless chain recovers ||h||^2 s
        const cdouble s1(0.3, -1.1), s2(-0.7, 0.2);
        const StBlock blk = alamouti_encode(s1, s2);
        const cdouble y1 = h.dot(blk.slot1), y2 = h.dot(blk.slot2);
        const auto [z1, z2] = combine(y1, y2, h);
        CHECK(std::abs(z1 - h.squaredNorm() * s1) <= 1e-12 * h.squaredNorm());
        CHECK(std::abs(z2 - h.squaredNorm() * s2) <= 1e-12 * h.squaredNorm());
    }
    const auto [z1, z2] = combine(1.0, 1.0, Eigen::Vector2cd::Zero());
    CHECK(z1 == cdouble(0.0));
    CHECK(z2 == cdouble(0.0));
}

TEST_CASE("feed-pair embedding")
{
    const FeedPair pair{1, 3};
    const RMat pi_matrix = pair.embed(4);
    CHECK(pi_matrix.sum() == 2.0);
    CHECK(pi_matrix(1, 0) == 1.0);
    CHECK(pi_matrix(3, 1) == 1.0);
    const auto [x1, x2] = embed_common(pair, alamouti_encode(1.0, 2.0), 4);
    CHECK(x1(0) == cdouble(0.0));
    CHECK(x1(1) == cdouble(1.0));
    CHECK(x1(3) == cdouble(2.0));
    CHECK(x2(1) == cdouble(-2.0));
    CHECK_THROWS_AS(FeedPair({2, 1}).embed(4), InputError);
    CHECK_THROWS_AS(FeedPair({0, 4}).embed(4), InputError);
}

TEST_CASE("rate expressions agree with the SINR oracle")
{
    auto engine = make_engine(3, Stream::test);
    for (int t = 0; t < 50; ++t)
    {
        const CVec h = oracle::random_cn(engine, 3, 2.0);
        const CMat P = oracle::random_cn(engine, 3, 3, 0.5);
        const CVec pc = oracle::random_cn(engine, 3, 0.5);
        const FeedPair pair{0, 2};
        CHECK(common_rate_st(h, pair, 0.7, P) ==
              doctest::Approx(std::log2(1.0 + oracle::st_common_sinr(h, pair, 0.7, P))).epsilon(1e-13));
        CHECK(common_rate_beam(h, pc, P) ==
              doctest::Approx(std::log2(1.0 + oracle::beam_common_sinr(h, pc, P))).epsilon(1e-13));
        for (int k = 0; k < 3; ++k)
            CHECK(private_rate(h, P, k) == doctest::Approx(std::log2(1.0 + oracle::private_sinr(h, P, k))).epsilon(1e-13));
    }
    CHECK_THROWS_AS(common_rate_st(CVec::Ones(2), {}, -1.0, CMat::Zero(2, 1)), InputError);
    CHECK_THROWS_AS(private_rate(CVec::Ones(2), CMat::Zero(2, 1), 1), InputError);
}

TEST_CASE("water-filling of common portions")
{
    RVec r(3);
    r << 1.0, 0.2, 0.5;
    const RVec c = waterfill_portions(r, 0.6);
    CHECK(c.sum() == doctest::Approx(0.6));
    CHECK((c.array() >= 0.0).all());
    // levels: 0.2 and 0.5 raised to 0.65, user 0 untouched
    CHECK(c(0) == doctest::Approx(0.0));
    CHECK(r(1) + c(1) == doctest::Approx(0.65));
    CHECK(r(2) + c(2) == doctest::Approx(0.65));
    CHECK(waterfill_portions(r, 0.0).isZero());
    const RVec big = waterfill_portions(r, 3.0);
    CHECK((r + big).maxCoeff() - (r + big).minCoeff() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("feed-pair selection matches brute force and its tie-break")
{
    auto engine = make_engine(4, Stream::test);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 100; ++t)
    {
        std::vector<CVec> h;
        for (int k = 0; k < 4; ++k)
        {
            CVec v = oracle::random_cn(engine, 5, 1.0);
            for (int n = 0; n < 5; ++n)
                v(n) *= 0.1 + 2.0 * unit(engine);
            h.push_back(v);
        }
        ChannelSet c = perfect(h);
        for (auto &phi : c.error_cov)
            phi = CMat::Identity(5, 5) * unit(engine);
        CHECK(select_feed_pair(c) == oracle::brute_force_pair(c.h_est, c.error_cov));
    }
    // all pairs tie: lexicographically smallest wins
    const ChannelSet flat = perfect({CVec::Ones(4), CVec::Ones(4)});
    CHECK(select_feed_pair(flat) == FeedPair{0, 1});
    CHECK_THROWS_AS(select_feed_pair(perfect({CVec::Ones(1)})), InputError);
}

TEST_CASE("SAA rates average per-sample rates")
{
    auto engine = make_engine(5, Stream::test);
    PrecoderSolution s;
    s.mode = Mode::st_rsma;
    s.common_power = 0.4;
    s.private_precoders = oracle::random_cn(engine, 2, 2, 0.5);
    s.common_portions = RVec::Constant(2, 0.1);
    std::vector<CMat> samples = {oracle::random_cn(engine, 2, 7, 2.0), oracle::random_cn(engine, 2, 7, 2.0)};
    const RateReport r = saa_rates(samples, s);
    double common = 0.0, priv = 0.0;
    for (int j = 0; j < 7; ++j)
    {
        const CVec h = samples[1].col(j);
        common += std::log2(1.0 + oracle::st_common_sinr(h, {0, 1}, 0.4, s.private_precoders));
        priv += std::log2(1.0 + oracle::private_sinr(h, s.private_precoders, 1));
    }
    CHECK(r.common(1) == doctest::Approx(common / 7).epsilon(1e-13));
    CHECK(r.private_(1) == doctest::Approx(priv / 7).epsilon(1e-13));
    CHECK(r.total(1) == doctest::Approx(priv / 7 + 0.1).epsilon(1e-13));
    samples.pop_back();
    CHECK_THROWS_AS(saa_rates(samples, s), InputError);
}

TEST_CASE("link simulation: SINRs, determinism, saturation, input checks")
{
    auto engine = make_engine(6, Stream::test);
    const ChannelSet c = perfect({oracle::random_cn(engine, 2, 2.0), oracle::random_cn(engine, 2, 2.0)});
    PrecoderSolution s;
    s.mode = Mode::st_rsma;
    s.common_power = 0.8;
    s.private_precoders = oracle::random_cn(engine, 2, 2, 0.4);
    const LinkMeasurement a = simulate_link(c, s, 20000, 3), b = simulate_link(c, s, 20000, 3);
    CHECK(a.common_sinr == b.common_sinr);
    for (int k = 0; k < 2; ++k)
    {
        CHECK(a.common_sinr(k) ==
              doctest::Approx(oracle::st_common_sinr(c.h_true[k], {0, 1}, 0.8, s.private_precoders)).epsilon(0.05));
        CHECK(a.private_sinr(k) == doctest::Approx(oracle::private_sinr(c.h_true[k], s.private_precoders, k)).epsilon(0.05));
    }
    // noiseless, single user without private interference: saturated
    PrecoderSolution solo;
    solo.mode = Mode::st_rsma;
    solo.common_power = 1.0;
    solo.private_precoders = CMat::Zero(2, 1);
    const LinkMeasurement sat = simulate_link(perfect({CVec::Ones(2)}), solo, 1000, 1, 0.0);
    CHECK(sat.common_saturated[0]);
    CHECK(std::isinf(sat.common_sinr(0)));

    CHECK_THROWS_AS(simulate_link(c, s, 999, 1), InputError);
    PrecoderSolution wrong = s;
    wrong.private_precoders = CMat::Zero(2, 3);
    CHECK_THROWS_AS(simulate_link(c, wrong, 1000, 1), InputError);
}
