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

#ifndef strsma_qcqp_H
#define strsma_qcqp_H

#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "strsma/types.hpp"

namespace strsma::qcqp
{

/// Symmetric PSD block of Q occupying rows/cols [offset, offset + size).
struct QuadBlock
{
    int offset = 0;
    RMat matrix;
};

/// g(x) = x^T Q x - a^T x + b <= 0, with Q stored as a sum of blocks.
struct Constraint
{
    std::vector<QuadBlock> blocks;
    RVec a;
    double b = 0.0;

    double value(const RVec &x) const;
    RVec gradient(const RVec &x) const;
    /// H += weight * 2Q
    void add_hessian(RMat &hessian, double weight) const;
    RMat dense_q(int n_vars) const;
    bool is_linear() const { return blocks.empty(); }

    static Constraint linear(RVec a, double b);
    static Constraint dense(RMat q, RVec a, double b);
};

/// maximise c^T x subject to every constraint, and x >= lower_bounds when given.
struct Problem
{
    int n_vars = 0;
    RVec objective;
    std::vector<Constraint> constraints;
    std::optional<RVec> lower_bounds;

    /// Throws InputError on inconsistent dimensions, an empty constraint list,
    /// or a Q block with an eigenvalue below -1e-9.
    void validate() const;

    /// Copy with lower bounds turned into linear constraints and slightly
    /// negative Q eigenvalues (>= -1e-9) clipped to zero.
    Problem normalized() const;

    std::vector<double> values(const RVec &x) const;
    double max_violation(const RVec &x) const; // max_i g_i(x)
};

struct Params
{
    double mu_factor = 10.0;
    double alpha = 0.3; // Armijo fraction
    double beta = 0.8;  // backtracking shrink
    double newton_tol = 1e-9;
    int max_outer = 60;
    int max_newton = 50;
    double t0 = 1.0;
};

enum class Status
{
    optimal,
    max_iter,
    infeasible_start
};

std::string_view to_string(Status status);

struct Solution
{
    RVec x;
    double objective_value = 0.0;
    double kkt_residual = 0.0;
    int barrier_iterations = 0;
    int newton_iterations = 0;
    Status status = Status::max_iter;
    RVec duals;                          // one per constraint of normalized(), bounds last
    std::vector<double> outer_objective; // c^T x after each centring step
};

/// Log-barrier path following with damped Newton centring.
Solution solve(const Problem &problem, const RVec &x0, const Params &params = {});

/// Strictly feasible point: `hint` itself when it already is, otherwise the
/// phase-I problem min s s.t. g_i(x) <= s is solved from `hint` (origin when
/// omitted). Returns nullopt when the phase-I optimum is >= 0.
std::optional<RVec> find_strictly_feasible(const Problem &problem, const std::optional<RVec> &hint = std::nullopt);

/// max(||-c + sum_i lambda_i grad g_i||_inf, max_i |lambda_i g_i|, max_i max(g_i, 0))
/// over the constraints of problem.normalized(). Duals must be nonnegative.
double check_kkt(const Problem &problem, const RVec &x, const RVec &duals);

/// Plain-text dump: header, objective, then per constraint the dense Q (row-major),
/// a and b; lower bounds last when present.
void write_text(std::ostream &out, const Problem &problem);

} // namespace strsma::qcqp

#endif
