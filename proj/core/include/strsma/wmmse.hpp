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

#ifndef strsma_wmmse_H
#define strsma_wmmse_H

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "strsma/channel.hpp"
#include "strsma/qcqp.hpp"
#include "strsma/spacetime.hpp"
#include "strsma/types.hpp"

namespace strsma
{

/// Step II failed (no strictly feasible start, or the barrier solver gave up
/// without a usable point). The message carries the outer-iteration context.
class SolverError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// ---------- MSE machinery ----------

struct MseTerms
{
    double common = 0.0;   // T_c = |a_c|^2 + sum_j |h^H p_j|^2 + sigma^2
    double private_ = 0.0; // T_p = sum_j |h^H p_j|^2 + sigma^2
};

/// ST form: the common amplitude is ||h_pair|| sqrt(P_c / 2). With N_t = 2 the
/// pair covers all of h.
MseTerms mse_terms(const CVec &h, double common_power, const CMat &precoders, double noise = unit_noise,
                   const FeedPair &pair = {});

/// MMSE equalisers and weights of one (user, sample) entry.
struct EqualizerEntry
{
    cdouble g_c;       // common equaliser
    cdouble g_p;       // private equaliser
    double u_c = 1.0;  // 1 / eps_c^MMSE
    double u_p = 1.0;  // 1 / eps_p^MMSE
    double eps_c = 1.0;
    double eps_p = 1.0;
    MseTerms t;
};

/// Weights indexed [user][sample].
struct EqualizerWeights
{
    std::vector<std::vector<EqualizerEntry>> entries;
};

/// General form: the received common component is `common_amplitude * s_c`
/// (||h_pair|| sqrt(P_c/2) for ST, h^H p_c for a beamformed common stream).
EqualizerEntry mmse_update(const CVec &h, cdouble common_amplitude, const CMat &precoders, int k,
                           double noise = unit_noise);

/// ST form of mmse_update.
EqualizerEntry mmse_update_st(const CVec &h, double common_power, const CMat &precoders, int k,
                              double noise = unit_noise, const FeedPair &pair = {});

/// eps(g) = |g|^2 T - 2 Re{g a} + 1 for an arbitrary equaliser g.
double mse_with(cdouble g, double total_power, cdouble signal_amplitude);

/// xi = u eps - log2 u (augmented WMSE).
double wmse(double u, double eps);

/// (1 - u eps) / ln 2 + log2 u. Lower-bounds -log2 eps for every u > 0 and is
/// tight at u = 1/eps; this is the per-sample quantity the Step II subproblem
/// constrains.
double surrogate_rate(double u, double eps);

/// Common amplitude of the current transmit configuration for channel h.
cdouble common_amplitude(const CVec &h, const PrecoderSolution &solution);

EqualizerWeights compute_weights(const std::vector<CMat> &samples, const PrecoderSolution &solution,
                                 double noise = unit_noise);

// ---------- Sample averages ----------

struct SampleAveragedTerms
{
    double tau_c = 0.0;
    double tau_p = 0.0;
    double psi_c = 0.0;  // tau_c ||h_pair||^2
    CMat Psi_c;          // tau_c h h^H
    CMat Psi_p;          // tau_p h h^H
    cdouble w_c;         // u_c g_c ||h_pair||  (ST)
    CVec w_c_beam;       // u_c g_c^* h         (beamformed common)
    CVec w_p;            // u_p g_p^* h
    double v_c = 0.0;    // log2 u_c
    double v_p = 0.0;
    double u_c = 0.0;
    double u_p = 0.0;
};

/// Per-user means over the S samples; weights[k][s] must come from samples[k].col(s).
std::vector<SampleAveragedTerms> average_terms(const std::vector<CMat> &samples, const EqualizerWeights &weights,
                                               const FeedPair &pair = {});

// ---------- Step II subproblem ----------

/// Offsets of each decision-variable group in the real-lifted vector (-1 when
/// the mode has no such group). Complex vectors occupy [Re; Im].
struct VariableLayout
{
    Mode mode = Mode::st_rsma;
    int n_t = 0;
    int k_users = 0;
    int y = -1;     // sqrt(P_c / 2), ST only
    int p_c = -1;   // common beamformer, 2 N_t reals
    int p = -1;     // private precoders, 2 N_t reals per user
    int c = -1;     // common portions
    int alpha = -1; // private-rate epigraph variables
    int q = -1;
    int n_vars = 0;

    int private_offset(int k) const { return p + 2 * n_t * k; }
};

VariableLayout make_layout(Mode mode, int n_t, int k_users);

/// Real embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.
RMat real_embedding(const CMat &hermitian);
RVec lift(const CVec &v);
CVec unlift(const RVec &x, int offset, int n);

/// P3 for one outer iteration: maximise q over the layout's variables. Every
/// rate constraint bounds the surrogate (1 - weighted MSE)/ln 2 + mean log2 u.
/// The power constraint is 2 y^2 + sum ||p_j||^2 <= P_t (ST) or
/// ||p_c||^2 + sum ||p_j||^2 <= P_t; y, C, alpha are bounded below by zero.
qcqp::Problem build_subproblem(const std::vector<SampleAveragedTerms> &terms, double p_t, Mode mode, int n_t,
                               double noise = unit_noise);

/// Baseline with a common beamformer p_c in place of the Alamouti pair.
qcqp::Problem conventional_rsma_subproblem(const std::vector<SampleAveragedTerms> &terms, double p_t, int n_t,
                                           double noise = unit_noise);

/// Decision vector holding the transmit configuration of `solution`; C, alpha and q are left at zero.
RVec pack_transmit(const VariableLayout &layout, const PrecoderSolution &solution);

/// Writes P_c / p_c / P / C / alpha / q from a decision vector into `solution`.
void unpack(const VariableLayout &layout, const RVec &x, PrecoderSolution &solution);

// ---------- Algorithm ----------

struct MaxMinParams
{
    double p_t = 1.0;          // W
    int heldout_samples = 100; // fresh samples for held-out evaluation
    double eps = 1e-4;
    int max_iter = 200;
    std::uint64_t seed = 0;    // held-out sample seed
    double noise = unit_noise;
    double shrink = 0.999;
    qcqp::Params solver;
};

struct MaxMinResult
{
    PrecoderSolution solution;
    RateReport in_sample; // on the optimisation samples, optimised portions
    RateReport heldout;   // fresh samples, portions re-allocated by water-filling
    int phase1_fallbacks = 0;
    int solver_max_iter = 0;
};

/// Initial feasible transmit configuration for a mode.
PrecoderSolution initial_solution(const ChannelSet &channels, Mode mode, double p_t);

/// Alternating WMMSE optimisation: Step I refreshes equalisers/weights on every
/// (user, sample), Step II solves the convex subproblem. Stops when
/// |q^[n] - q^[n-1]| <= eps or after max_iter iterations.
MaxMinResult solve_maxmin(const ChannelSet &channels, Mode mode, const MaxMinParams &params);

/// Fractional resource reuse: user k gets 1/K of the resource and a full-power
/// matched filter on its estimated channel; rates averaged over `samples`.
RateReport frr_rate(const ChannelSet &channels, double p_t, const std::vector<CMat> &samples,
                    double noise = unit_noise);

/// Held-out evaluation: SAA rates on `samples` with common portions
/// water-filled under the budget min_k R_c,k.
RateReport heldout_rates(const std::vector<CMat> &samples, const PrecoderSolution &solution,
                         double noise = unit_noise);

std::string to_json(const PrecoderSolution &solution, const std::string &extra_json = "{}");

} // namespace strsma

#endif
