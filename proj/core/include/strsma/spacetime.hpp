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

#ifndef strsma_spacetime_H
#define strsma_spacetime_H

#include <cstdint>
#include <utility>
#include <vector>

#include "strsma/channel.hpp"
#include "strsma/types.hpp"

namespace strsma
{

/// Alamouti block: slot1 = [s1, s2]^T, slot2 = [-s2*, s1*]^T.
struct StBlock
{
    Eigen::Vector2cd slot1;
    Eigen::Vector2cd slot2;
};

StBlock alamouti_encode(cdouble s1, cdouble s2);

/// Channel entries on the selected feeds, (h_m, h_n).
Eigen::Vector2cd pair_channel(const CVec &h, const FeedPair &pair);

/// Matrix mapping the common symbols onto the stacked observation [y(t), y*(t+T)].
Eigen::Matrix2cd stacked_channel(const Eigen::Vector2cd &h_pair);

/// Receiver combining matrix [[h1, h2*], [h2, -h1*]].
Eigen::Matrix2cd combining_matrix(const Eigen::Vector2cd &h_pair);

/// Applies the combining matrix to [y1, y2*]^T. A zero channel yields (0, 0).
std::pair<cdouble, cdouble> combine(cdouble y1, cdouble y2, const Eigen::Vector2cd &h_pair);

/// sum_j |h^H p_j|^2 over all private precoders.
double private_power_at(const CVec &h, const CMat &precoders);

/// log2(1 + ||h_pair||^2 (P_c/2) / (sum_j |h^H p_j|^2 + sigma^2)); interference uses the full h.
double common_rate_st(const CVec &h, const FeedPair &pair, double common_power, const CMat &precoders,
                      double noise = unit_noise);

/// Common rate when the common stream is beamformed with p_c.
double common_rate_beam(const CVec &h, const CVec &common_beam, const CMat &precoders, double noise = unit_noise);

/// log2(1 + |h^H p_k|^2 / (sum_{j != k} |h^H p_j|^2 + sigma^2)), after ideal SIC.
double private_rate(const CVec &h, const CMat &precoders, int k, double noise = unit_noise);

/// Per-user common/private spectral efficiencies per two-symbol ST block per Hz
/// (the two slot rates collapse to one log term).
struct RateReport
{
    RVec common;     // R_c,k (SAA mean when built from samples)
    RVec private_;   // R_p,k
    RVec portions;   // C_k credited to each user
    RVec total;      // R_p,k + C_k

    double min_common() const { return common.size() ? common.minCoeff() : 0.0; }
    double min_total() const { return total.size() ? total.minCoeff() : 0.0; }
};

/// Common rate of user k for a single channel realisation under the solution's mode.
double common_rate_for(const CVec &h, const PrecoderSolution &solution, double noise = unit_noise);

/// Per-sample rates averaged over each user's sample matrix (columns). The
/// common portions are taken from the solution unchanged.
RateReport saa_rates(const std::vector<CMat> &samples, const PrecoderSolution &solution, double noise = unit_noise);

/// Max-min reallocation of a common-rate budget: maximise min_k (private_k + C_k)
/// subject to sum C_k = budget, C_k >= 0 (water-filling).
RVec waterfill_portions(const RVec &private_rates, double budget);

/// argmax over pairs of min_k (||h_est,(m,n)||^2 + tr Phi_k restricted to (m, n)).
/// Exhaustive over all C(N_t, 2) pairs; ties go to the lexicographically smallest.
FeedPair select_feed_pair(const ChannelSet &channels);

/// Pi * slot1 and Pi * slot2 in C^{N_t}.
std::pair<CVec, CVec> embed_common(const FeedPair &pair, const StBlock &block, int n_t);

struct LinkMeasurement
{
    RVec common_sinr;  // measured per user; +inf when saturated (residual at rounding level)
    RVec private_sinr; // measured per user; +inf when saturated
    std::vector<bool> common_saturated;
    std::vector<bool> private_saturated;
    long blocks = 0;
};

/// Signal-level Monte Carlo of the two-slot transmission over h_true: Gaussian
/// symbols and noise, stacking and Alamouti combining (or the beamformed
/// common stream), common decoding, ideal SIC, private decoding. Blocks are
/// processed in fixed-size chunks with one substream each.
LinkMeasurement simulate_link(const ChannelSet &channels, const PrecoderSolution &solution, long n_blocks,
                              std::uint64_t seed, double noise = unit_noise);

} // namespace strsma

#endif
