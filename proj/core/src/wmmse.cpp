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

#include "strsma/wmmse.hpp"
#include "strsma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace strsma
{

namespace
{
constexpr double inv_ln2 = 1.4426950408889634;

bool has_common(Mode mode) { return mode == Mode::st_rsma || mode == Mode::rsma || mode == Mode::multicast; }
bool has_private(Mode mode) { return mode != Mode::multicast; }
bool beamformed_common(Mode mode) { return mode == Mode::rsma || mode == Mode::multicast; }

double pair_norm(const CVec &h, const FeedPair &pair)
{
    return h.size() <= 2 || (pair.m == 0 && pair.n == 1 && h.size() == 2) ? h.norm() : pair_channel(h, pair).norm();
}
} // namespace

// ---------- MSE machinery ----------

MseTerms mse_terms(const CVec &h, double common_power, const CMat &precoders, double noise, const FeedPair &pair)
{
    if (common_power < 0.0)
        throw InputError("mse_terms: common power must be nonnegative");
    const double interference = private_power_at(h, precoders) + noise;
    const double gain = pair_norm(h, pair);
    return {gain * gain * 0.5 * common_power + interference, interference};
}

EqualizerEntry mmse_update(const CVec &h, cdouble common_amplitude, const CMat &precoders, int k, double noise)
{
    EqualizerEntry e;
    const Eigen::RowVectorXcd gains =
        precoders.cols() > 0 ? Eigen::RowVectorXcd(h.adjoint() * precoders) : Eigen::RowVectorXcd(0);
    const double private_power = gains.squaredNorm();
    e.t.private_ = private_power + noise;
    e.t.common = std::norm(common_amplitude) + e.t.private_;

    e.g_c = std::conj(common_amplitude) / e.t.common;
    e.eps_c = (e.t.common - std::norm(common_amplitude)) / e.t.common;
    e.u_c = 1.0 / e.eps_c;

    const cdouble own = (k >= 0 && k < gains.size()) ? gains(k) : cdouble(0.0);
    e.g_p = std::conj(own) / e.t.private_;
    e.eps_p = (e.t.private_ - std::norm(own)) / e.t.private_;
    e.u_p = 1.0 / e.eps_p;
    return e;
}

EqualizerEntry mmse_update_st(const CVec &h, double common_power, const CMat &precoders, int k, double noise,
                              const FeedPair &pair)
{
    if (common_power < 0.0)
        throw InputError("mmse_update: common power must be nonnegative");
    return mmse_update(h, pair_norm(h, pair) * std::sqrt(0.5 * common_power), precoders, k, noise);
}

double mse_with(cdouble g, double total_power, cdouble signal_amplitude)
{
    return std::norm(g) * total_power - 2.0 * (g * signal_amplitude).real() + 1.0;
}

double wmse(double u, double eps) { return u * eps - std::log2(u); }

double surrogate_rate(double u, double eps) { return (1.0 - u * eps) * inv_ln2 + std::log2(u); }

cdouble common_amplitude(const CVec &h, const PrecoderSolution &solution)
{
    switch (solution.mode)
    {
    case Mode::st_rsma: return pair_norm(h, solution.pair) * std::sqrt(0.5 * solution.common_power);
    case Mode::rsma:
    case Mode::multicast: return h.dot(solution.common_beam);
    default: return 0.0;
    }
}

EqualizerWeights compute_weights(const std::vector<CMat> &samples, const PrecoderSolution &solution, double noise)
{
    EqualizerWeights w;
    const int k_users = static_cast<int>(samples.size());
    w.entries.resize(k_users);
    for (int k = 0; k < k_users; ++k)
    {
        const Eigen::Index n_samples = samples[k].cols();
        w.entries[k].reserve(n_samples);
        for (Eigen::Index s = 0; s < n_samples; ++s)
        {
            const CVec h = samples[k].col(s);
            w.entries[k].push_back(mmse_update(h, common_amplitude(h, solution), solution.private_precoders, k, noise));
        }
    }
    return w;
}

// ---------- Sample averages ----------

std::vector<SampleAveragedTerms> average_terms(const std::vector<CMat> &samples, const EqualizerWeights &weights,
                                               const FeedPair &pair)
{
    const int k_users = static_cast<int>(samples.size());
    if (static_cast<int>(weights.entries.size()) != k_users)
        throw InputError("average_terms: weights and samples disagree on user count");

    std::vector<SampleAveragedTerms> out(k_users);
    for (int k = 0; k < k_users; ++k)
    {
        const CMat &H = samples[k];
        const Eigen::Index n_t = H.rows();
        const Eigen::Index n_samples = H.cols();
        if (static_cast<Eigen::Index>(weights.entries[k].size()) != n_samples || n_samples == 0)
            throw InputError("average_terms: weights and samples disagree on sample count");

        RVec tau_c(n_samples), tau_p(n_samples);
        CVec beam_coef(n_samples), priv_coef(n_samples);
        auto &t = out[k];
        t.w_c = 0.0;
        for (Eigen::Index s = 0; s < n_samples; ++s)
        {
            const auto &e = weights.entries[k][s];
            const CVec h = H.col(s);
            const double gain = pair_norm(h, pair);
            tau_c(s) = e.u_c * std::norm(e.g_c);
            tau_p(s) = e.u_p * std::norm(e.g_p);
            t.psi_c += tau_c(s) * gain * gain;
            t.w_c += e.u_c * e.g_c * gain;
            beam_coef(s) = e.u_c * std::conj(e.g_c);
            priv_coef(s) = e.u_p * std::conj(e.g_p);
            t.v_c += std::log2(e.u_c);
            t.v_p += std::log2(e.u_p);
            t.u_c += e.u_c;
            t.u_p += e.u_p;
        }
        const double inv_s = 1.0 / static_cast<double>(n_samples);
        t.tau_c = tau_c.sum() * inv_s;
        t.tau_p = tau_p.sum() * inv_s;
        t.psi_c *= inv_s;
        t.w_c *= inv_s;
        t.v_c *= inv_s;
        t.v_p *= inv_s;
        t.u_c *= inv_s;
        t.u_p *= inv_s;
        t.Psi_c = (H * tau_c.cast<cdouble>().asDiagonal() * H.adjoint()) * inv_s;
        t.Psi_p = (H * tau_p.cast<cdouble>().asDiagonal() * H.adjoint()) * inv_s;
        t.Psi_c = 0.5 * (t.Psi_c + t.Psi_c.adjoint()).eval();
        t.Psi_p = 0.5 * (t.Psi_p + t.Psi_p.adjoint()).eval();
        t.w_c_beam = H * beam_coef * inv_s;
        t.w_p = H * priv_coef * inv_s;
        (void)n_t;
    }
    return out;
}

// ---------- Step II subproblem ----------

VariableLayout make_layout(Mode mode, int n_t, int k_users)
{
    if (mode == Mode::frr)
        throw InputError("FRR has no optimisation subproblem");
    if (n_t < 1 || k_users < 1)
        throw InputError("make_layout: n_t and k_users must be >= 1");
    VariableLayout l;
    l.mode = mode;
    l.n_t = n_t;
    l.k_users = k_users;
    int next = 0;
    if (mode == Mode::st_rsma)
        l.y = next++;
    if (beamformed_common(mode))
    {
        l.p_c = next;
        next += 2 * n_t;
    }
    if (has_private(mode))
    {
        l.p = next;
        next += 2 * n_t * k_users;
    }
    if (has_common(mode))
    {
        l.c = next;
        next += k_users;
    }
    if (has_private(mode))
    {
        l.alpha = next;
        next += k_users;
    }
    l.q = next++;
    l.n_vars = next;
    return l;
}

RMat real_embedding(const CMat &m)
{
    const Eigen::Index n = m.rows();
    RMat r(2 * n, 2 * n);
    r.topLeftCorner(n, n) = m.real();
    r.topRightCorner(n, n) = -m.imag();
    r.bottomLeftCorner(n, n) = m.imag();
    r.bottomRightCorner(n, n) = m.real();
    return r;
}

RVec lift(const CVec &v)
{
    RVec x(2 * v.size());
    x.head(v.size()) = v.real();
    x.tail(v.size()) = v.imag();
    return x;
}

CVec unlift(const RVec &x, int offset, int n)
{
    CVec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = cdouble(x(offset + i), x(offset + n + i));
    return v;
}

qcqp::Problem build_subproblem(const std::vector<SampleAveragedTerms> &terms, double p_t, Mode mode, int n_t,
                               double noise)
{
    if (!(p_t > 0.0))
        throw InputError("build_subproblem: P_t must be positive");
    const int k_users = static_cast<int>(terms.size());
    const VariableLayout l = make_layout(mode, n_t, k_users);
    const int n = l.n_vars;
    const int dim = 2 * n_t;

    qcqp::Problem prob;
    prob.n_vars = n;
    prob.objective = RVec::Zero(n);
    prob.objective(l.q) = 1.0;

    for (const auto &t : terms)
        if (!(std::isfinite(t.tau_c) && std::isfinite(t.tau_p) && std::isfinite(t.u_c) && std::isfinite(t.u_p)))
            throw InputError("build_subproblem: non-finite sample-averaged terms");

    // private rate: L (sum_j p_j^H Psi_p p_j - 2 Re{w_p^H p_k} + tau_p s2 + u_p - 1) - v_p + alpha_k <= 0
    if (has_private(mode))
        for (int k = 0; k < k_users; ++k)
        {
            const auto &t = terms[k];
            qcqp::Constraint c;
            const RMat block = inv_ln2 * real_embedding(t.Psi_p);
            for (int j = 0; j < k_users; ++j)
                c.blocks.push_back({l.private_offset(j), block});
            c.a = RVec::Zero(n);
            c.a.segment(l.private_offset(k), dim) = 2.0 * inv_ln2 * lift(t.w_p);
            c.a(l.alpha + k) = -1.0;
            c.b = inv_ln2 * (t.tau_p * noise + t.u_p - 1.0) - t.v_p;
            prob.constraints.push_back(std::move(c));
        }

    // common rate: same shape with the common signal term, bounded by sum_j C_j
    if (has_common(mode))
        for (int k = 0; k < k_users; ++k)
        {
            const auto &t = terms[k];
            qcqp::Constraint c;
            c.a = RVec::Zero(n);
            const RMat block = inv_ln2 * real_embedding(t.Psi_c);
            if (mode == Mode::st_rsma)
            {
                c.blocks.push_back({l.y, RMat::Constant(1, 1, inv_ln2 * t.psi_c)});
                c.a(l.y) = 2.0 * inv_ln2 * t.w_c.real();
            }
            else
            {
                c.blocks.push_back({l.p_c, block});
                c.a.segment(l.p_c, dim) = 2.0 * inv_ln2 * lift(t.w_c_beam);
            }
            if (has_private(mode))
                for (int j = 0; j < k_users; ++j)
                    c.blocks.push_back({l.private_offset(j), block});
            c.a.segment(l.c, k_users).setConstant(-1.0);
            c.b = inv_ln2 * (t.tau_c * noise + t.u_c - 1.0) - t.v_c;
            prob.constraints.push_back(std::move(c));
        }

    // total power
    {
        qcqp::Constraint c;
        c.a = RVec::Zero(n);
        c.b = -p_t;
        if (mode == Mode::st_rsma)
            c.blocks.push_back({l.y, RMat::Constant(1, 1, 2.0)});
        if (beamformed_common(mode))
            c.blocks.push_back({l.p_c, RMat::Identity(dim, dim)});
        if (has_private(mode))
            c.blocks.push_back({l.p, RMat::Identity(dim * k_users, dim * k_users)});
        prob.constraints.push_back(std::move(c));
    }

    // epigraph: q - alpha_k - C_k <= 0
    for (int k = 0; k < k_users; ++k)
    {
        RVec a = RVec::Zero(n);
        a(l.q) = -1.0;
        if (l.alpha >= 0)
            a(l.alpha + k) = 1.0;
        if (l.c >= 0)
            a(l.c + k) = 1.0;
        prob.constraints.push_back(qcqp::Constraint::linear(std::move(a), 0.0));
    }

    RVec lower = RVec::Constant(n, -std::numeric_limits<double>::infinity());
    if (l.y >= 0)
        lower(l.y) = 0.0;
    if (l.c >= 0)
        lower.segment(l.c, k_users).setZero();
    if (l.alpha >= 0)
        lower.segment(l.alpha, k_users).setZero();
    prob.lower_bounds = lower;
    return prob;
}

qcqp::Problem conventional_rsma_subproblem(const std::vector<SampleAveragedTerms> &terms, double p_t, int n_t,
                                           double noise)
{
    return build_subproblem(terms, p_t, Mode::rsma, n_t, noise);
}

RVec pack_transmit(const VariableLayout &l, const PrecoderSolution &s)
{
    RVec x = RVec::Zero(l.n_vars);
    if (l.y >= 0)
        x(l.y) = std::sqrt(0.5 * s.common_power);
    if (l.p_c >= 0)
        x.segment(l.p_c, 2 * l.n_t) = lift(s.common_beam);
    if (l.p >= 0)
        for (int k = 0; k < l.k_users; ++k)
            x.segment(l.private_offset(k), 2 * l.n_t) = lift(s.private_precoders.col(k));
    return x;
}

void unpack(const VariableLayout &l, const RVec &x, PrecoderSolution &s)
{
    s.mode = l.mode;
    s.common_power = 0.0;
    s.common_beam.resize(0);
    if (l.y >= 0)
        s.common_power = 2.0 * x(l.y) * x(l.y);
    if (l.p_c >= 0)
    {
        s.common_beam = unlift(x, l.p_c, l.n_t);
        s.common_power = s.common_beam.squaredNorm();
    }
    s.private_precoders = CMat::Zero(l.n_t, l.k_users);
    if (l.p >= 0)
        for (int k = 0; k < l.k_users; ++k)
            s.private_precoders.col(k) = unlift(x, l.private_offset(k), l.n_t);
    s.common_portions = l.c >= 0 ? RVec(x.segment(l.c, l.k_users)) : RVec::Zero(l.k_users);
    s.private_rates = l.alpha >= 0 ? RVec(x.segment(l.alpha, l.k_users)) : RVec::Zero(l.k_users);
    s.q = x(l.q);
}

// ---------- Algorithm ----------

PrecoderSolution initial_solution(const ChannelSet &channels, Mode mode, double p_t)
{
    const int k_users = channels.k_users();
    const int n_t = channels.n_t();
    if (static_cast<int>(channels.h_est.size()) != k_users)
        throw InputError("initial_solution: estimated channels required");

    PrecoderSolution s;
    s.mode = mode;
    s.private_precoders = CMat::Zero(n_t, k_users);
    s.common_portions = RVec::Zero(k_users);
    s.private_rates = RVec::Zero(k_users);
    if (n_t >= 2)
        s.pair = select_feed_pair(channels);

    const double private_share = mode == Mode::sdma ? p_t / k_users : 0.5 * p_t / k_users;
    if (has_private(mode))
        for (int k = 0; k < k_users; ++k)
        {
            const double norm = channels.h_est[k].norm();
            CVec dir = norm > 0.0 ? CVec(channels.h_est[k] / norm) : CVec(CVec::Unit(n_t, k % n_t));
            s.private_precoders.col(k) = dir * std::sqrt(private_share);
        }

    const double common_share = mode == Mode::multicast ? p_t : 0.5 * p_t;
    if (mode == Mode::st_rsma)
        s.common_power = common_share;
    if (beamformed_common(mode))
    {
        CMat gram = CMat::Zero(n_t, n_t);
        for (const auto &h : channels.h_est)
            if (h.squaredNorm() > 0.0)
                gram += h * h.adjoint() / h.squaredNorm();
        Eigen::SelfAdjointEigenSolver<CMat> eig(gram);
        s.common_beam = eig.eigenvectors().col(n_t - 1) * std::sqrt(common_share);
        s.common_power = common_share;
    }
    return s;
}

namespace
{

// Strictly interior start for the subproblem from the previous transmit
// configuration, or nullopt when the analytic construction fails.
std::optional<RVec> interior_start(const qcqp::Problem &prob, const VariableLayout &l, PrecoderSolution current,
                                   double shrink)
{
    const double amp = std::sqrt(shrink);
    current.private_precoders *= amp;
    current.common_beam *= amp;
    current.common_power *= shrink;
    RVec x = pack_transmit(l, current);
    if (l.y >= 0 && x(l.y) <= 1e-12)
        x(l.y) = 1e-9;

    // Constraint order from build_subproblem: private rates, common rates, power, epigraphs.
    const int k_users = l.k_users;
    int idx = 0;
    RVec r_p = RVec::Zero(k_users), r_c = RVec::Zero(k_users);
    if (l.alpha >= 0)
        for (int k = 0; k < k_users; ++k)
            r_p(k) = -prob.constraints[idx++].value(x); // alpha = 0 here
    double common_budget = 0.0;
    if (l.c >= 0)
    {
        for (int k = 0; k < k_users; ++k)
            r_c(k) = -prob.constraints[idx++].value(x);
        common_budget = r_c.minCoeff();
        if (!(common_budget > 0.0))
            return std::nullopt;
        x.segment(l.c, k_users).setConstant(0.5 * common_budget / k_users);
    }
    if (l.alpha >= 0)
    {
        if (!(r_p.minCoeff() > 0.0))
            return std::nullopt;
        x.segment(l.alpha, k_users) = 0.5 * r_p;
    }
    double floor = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_users; ++k)
    {
        double v = 0.0;
        if (l.alpha >= 0)
            v += x(l.alpha + k);
        if (l.c >= 0)
            v += x(l.c + k);
        floor = std::min(floor, v);
    }
    x(l.q) = floor - 1e-3;
    if (!(prob.max_violation(x) < 0.0))
        return std::nullopt;
    return x;
}

} // namespace

MaxMinResult solve_maxmin(const ChannelSet &channels, Mode mode, const MaxMinParams &params)
{
    if (mode == Mode::frr)
        throw InputError("solve_maxmin: FRR is evaluated by frr_rate");
    const int k_users = channels.k_users();
    const int n_t = channels.n_t();
    if (channels.n_samples() < 1 || static_cast<int>(channels.h_est.size()) != k_users)
        throw InputError("solve_maxmin: channels must carry estimates and SAA samples");
    if (mode == Mode::st_rsma && n_t < 2)
        throw InputError("solve_maxmin: ST_RSMA needs at least two feeds");
    if (!(params.p_t > 0.0) || params.max_iter < 1 || !(params.eps > 0.0))
        throw InputError("solve_maxmin: invalid parameters");

    MaxMinResult result;
    PrecoderSolution current = initial_solution(channels, mode, params.p_t);
    const VariableLayout layout = make_layout(mode, n_t, k_users);

    double q_prev = 0.0;
    for (int n = 1; n <= params.max_iter; ++n)
    {
        const EqualizerWeights weights = compute_weights(channels.samples, current, params.noise);
        const auto terms = average_terms(channels.samples, weights, current.pair);
        const qcqp::Problem prob = build_subproblem(terms, params.p_t, mode, n_t, params.noise);

        std::optional<RVec> start = interior_start(prob, layout, current, params.shrink);
        if (!start)
        {
            ++result.phase1_fallbacks;
            start = qcqp::find_strictly_feasible(prob, pack_transmit(layout, current));
        }
        if (!start)
            throw SolverError("iteration " + std::to_string(n) + " (" + std::string(to_string(mode)) +
                              "): no strictly feasible start for the subproblem");

        const qcqp::Solution sol = qcqp::solve(prob, *start, params.solver);
        if (sol.status == qcqp::Status::infeasible_start || !(prob.max_violation(sol.x) <= 1e-7))
            throw SolverError("iteration " + std::to_string(n) + " (" + std::string(to_string(mode)) +
                              "): subproblem solve failed with status " + std::string(qcqp::to_string(sol.status)));
        if (sol.status == qcqp::Status::max_iter)
            ++result.solver_max_iter;

        const FeedPair pair = current.pair;
        unpack(layout, sol.x, current);
        current.pair = pair;
        current.trace.push_back(current.q);
        current.iterations = n;
        if (std::abs(current.q - q_prev) <= params.eps)
        {
            current.converged = true;
            break;
        }
        q_prev = current.q;
    }

    result.solution = current;
    result.in_sample = saa_rates(channels.samples, current, params.noise);
    const ChannelSet fresh = draw_saa_samples(channels, params.heldout_samples, params.seed);
    result.heldout = heldout_rates(fresh.samples, current, params.noise);
    return result;
}

RateReport heldout_rates(const std::vector<CMat> &samples, const PrecoderSolution &solution, double noise)
{
    RateReport report = saa_rates(samples, solution, noise);
    const double budget = has_common(solution.mode) ? report.min_common() : 0.0;
    report.portions = waterfill_portions(report.private_, budget);
    report.total = report.private_ + report.portions;
    return report;
}

RateReport frr_rate(const ChannelSet &channels, double p_t, const std::vector<CMat> &samples, double noise)
{
    const int k_users = channels.k_users();
    if (k_users < 1)
        throw InputError("frr_rate: at least one user required");
    if (static_cast<int>(samples.size()) != k_users || static_cast<int>(channels.h_est.size()) != k_users)
        throw InputError("frr_rate: samples and estimates required for every user");
    RateReport report;
    report.common = RVec::Zero(k_users);
    report.portions = RVec::Zero(k_users);
    report.private_ = RVec::Zero(k_users);
    for (int k = 0; k < k_users; ++k)
    {
        const CVec &est = channels.h_est[k];
        const double est_norm = est.norm();
        const Eigen::Index n_samples = samples[k].cols();
        double sum = 0.0;
        for (Eigen::Index s = 0; s < n_samples; ++s)
        {
            const CVec h = samples[k].col(s);
            const double gain = est_norm > 0.0 ? std::norm(h.dot(est)) / (est_norm * est_norm) : 0.0;
            sum += std::log2(1.0 + gain * p_t / noise);
        }
        report.private_(k) = sum / static_cast<double>(n_samples) / static_cast<double>(k_users);
    }
    report.total = report.private_;
    return report;
}

std::string to_json(const PrecoderSolution &s, const std::string &extra_json)
{
    nlohmann::json j;
    j["mode"] = std::string(to_string(s.mode));
    j["common_power"] = s.common_power;
    auto interleave = [](const CMat &m) {
        std::vector<double> flat;
        flat.reserve(2 * m.size());
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
            {
                flat.push_back(m(r, c).real());
                flat.push_back(m(r, c).imag());
            }
        return flat;
    };
    if (s.common_beam.size() > 0)
        j["common_beam"] = interleave(s.common_beam);
    j["private_precoders"] = {{"rows", s.private_precoders.rows()},
                              {"cols", s.private_precoders.cols()},
                              {"order", "column-major, interleaved re/im"},
                              {"data", interleave(s.private_precoders)}};
    j["common_portions"] = std::vector<double>(s.common_portions.data(), s.common_portions.data() + s.common_portions.size());
    j["private_rates"] = std::vector<double>(s.private_rates.data(), s.private_rates.data() + s.private_rates.size());
    j["q"] = s.q;
    j["trace"] = s.trace;
    j["iterations"] = s.iterations;
    j["converged"] = s.converged;
    if (s.mode == Mode::st_rsma)
        j["pair"] = {s.pair.m + 1, s.pair.n + 1};
    j["run"] = nlohmann::json::parse(extra_json);
    return j.dump(2);
}

} // namespace strsma
