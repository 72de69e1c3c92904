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

#ifndef strsma_types_H
#define strsma_types_H

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace strsma
{

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Noise power after the channel normalisation by sqrt(kappa * T_sys * B).
inline constexpr double unit_noise = 1.0;

enum class Mode
{
    st_rsma,   // Alamouti-coded common stream over a feed pair
    rsma,      // common stream carried by a beamforming vector
    sdma,      // private streams only
    multicast, // beamformed common stream only
    frr        // orthogonal 1/K resource split, matched filter
};

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name); // throws std::invalid_argument

// Rejected input (dimension mismatch, out-of-range parameter, malformed config).
class InputError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Transmit feeds carrying the two Alamouti branches. Indices are zero-based
/// internally; m < n.
struct FeedPair
{
    int m = 0;
    int n = 1;

    /// N_t x 2 selection matrix with ones at (m, 0) and (n, 1).
    RMat embed(int n_t) const;

    bool operator==(const FeedPair &) const = default;
};

/// Transmit-side configuration produced by the optimiser and consumed by the
/// link simulator and rate evaluators.
struct PrecoderSolution
{
    Mode mode = Mode::st_rsma;
    double common_power = 0.0; // P_c (ST_RSMA); ||p_c||^2 for beamformed modes
    CVec common_beam;          // p_c for RSMA / MULTICAST, empty otherwise
    CMat private_precoders;    // N_t x K
    RVec common_portions;      // C_k
    RVec private_rates;        // alpha_p,k
    double q = 0.0;
    std::vector<double> trace;
    FeedPair pair;
    int iterations = 0;
    bool converged = false;

    int n_t() const { return static_cast<int>(private_precoders.rows()); }
    int k_users() const { return static_cast<int>(private_precoders.cols()); }
    double total_power() const;
};

} // namespace strsma

#endif
