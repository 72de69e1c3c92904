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

#ifndef strsma_oracles_H
#define strsma_oracles_H

#include <cstdint>
#include <random>

#include "strsma/channel.hpp"
#include "strsma/qcqp.hpp"
#include "strsma/types.hpp"

// Independent reference computations. None of these call the code paths they
// are used to check.
namespace strsma::oracle
{

/// J_n(x) = (1 / 2 pi) int_0^{2 pi} cos(n t - x sin t) dt by the trapezoidal
/// rule, which converges geometrically for this periodic integrand.
double bessel_j_quadrature(int n, double x, int nodes = 512);

/// |h| of one feed entry evaluated directly from the link budget in dB.
double link_budget_magnitude(const SatelliteGeometry &g, double theta, double distance);

struct CutResult
{
    RVec x;                   // best feasible centre
    double value = 0.0;       // c^T x, a lower bound on the optimum
    double upper_bound = 0.0; // the optimum is at most this
    bool found = false;
};

/// Central-cut ellipsoid method for max c^T x over the feasible set of
/// `problem`, starting from the ball around the box [lo, hi]. Infeasible
/// centres are cut by the gradient of the most violated constraint, feasible
/// ones by the objective. Stops once upper_bound - value <= gap.
CutResult ellipsoid_max(const qcqp::Problem &problem, const RVec &lo, const RVec &hi, double gap = 1e-7,
                        int max_iter = 200000);

struct RandomQcqp
{
    qcqp::Problem problem;
    RVec lo;
    RVec hi;
};

/// Intersection of 1-3 well-conditioned ellipsoids that contain the origin
/// with margin, sometimes a halfspace and a lower bound, and a random linear
/// objective. Bounded by construction; the returned box contains the set.
RandomQcqp random_qcqp(std::mt19937_64 &engine, int n_vars);

/// Pair maximising min_k E||h_k restricted to (m, n)||^2, evaluated as
/// Pi^T (h h^H + Phi) Pi traces over every pair.
FeedPair brute_force_pair(const std::vector<CVec> &h_est, const std::vector<CMat> &error_cov);

/// log2(1 + ||h||^2 P_t / noise).
double single_user_capacity(const CVec &h, double p_t, double noise = 1.0);

/// Per-user SINRs from the definitions: common (ST) ||h_pair||^2 P_c/2 over
/// private power plus noise; private |h^H p_k|^2 over the other privates plus
/// noise. Loops are written out element by element.
double st_common_sinr(const CVec &h, const FeedPair &pair, double common_power, const CMat &precoders,
                      double noise = 1.0);
double beam_common_sinr(const CVec &h, const CVec &common_beam, const CMat &precoders, double noise = 1.0);
double private_sinr(const CVec &h, const CMat &precoders, int k, double noise = 1.0);

CVec random_cn(std::mt19937_64 &engine, int n, double scale = 1.0);
CMat random_cn(std::mt19937_64 &engine, int rows, int cols, double scale);

} // namespace strsma::oracle

#endif
