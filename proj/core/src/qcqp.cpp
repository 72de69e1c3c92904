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

#include "strsma/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace strsma::qcqp
{

double Constraint::value(const RVec &x) const
{
    double v = b - a.dot(x);
    for (const auto &blk : blocks)
    {
        const auto seg = x.segment(blk.offset, blk.matrix.rows());
        v += seg.dot(blk.matrix * seg);
    }
    return v;
}

RVec Constraint::gradient(const RVec &x) const
{
    RVec g = -a;
    for (const auto &blk : blocks)
    {
        const Eigen::Index n = blk.matrix.rows();
        g.segment(blk.offset, n) += 2.0 * (blk.matrix * x.segment(blk.offset, n));
    }
    return g;
}

void Constraint::add_hessian(RMat &hessian, double weight) const
{
    for (const auto &blk : blocks)
    {
        const Eigen::Index n = blk.matrix.rows();
        hessian.block(blk.offset, blk.offset, n, n) += (2.0 * weight) * blk.matrix;
    }
}

RMat Constraint::dense_q(int n_vars) const
{
    RMat q = RMat::Zero(n_vars, n_vars);
    for (const auto &blk : blocks)
    {
        const Eigen::Index n = blk.matrix.rows();
        q.block(blk.offset, blk.offset, n, n) += blk.matrix;
    }
    return q;
}

Constraint Constraint::linear(RVec a, double b)
{
    Constraint c;
    c.a = std::move(a);
    c.b = b;
    return c;
}

Constraint Constraint::dense(RMat q, RVec a, double b)
{
    Constraint c;
    c.blocks.push_back({0, std::move(q)});
    c.a = std::move(a);
    c.b = b;
    return c;
}

// ---------- Problem ----------

void Problem::validate() const
{
    if (n_vars < 1)
        throw InputError("qcqp: n_vars must be >= 1");
    if (objective.size() != n_vars)
        throw InputError("qcqp: objective length mismatch");
    if (constraints.empty())
        throw InputError("qcqp: at least one constraint required");
    if (lower_bounds && lower_bounds->size() != n_vars)
        throw InputError("qcqp: lower bound length mismatch");
    for (std::size_t i = 0; i < constraints.size(); ++i)
    {
        const auto &c = constraints[i];
        if (c.a.size() != n_vars)
            throw InputError("qcqp: constraint " + std::to_string(i) + " has wrong linear-term length");
        for (const auto &blk : c.blocks)
        {
            const Eigen::Index n = blk.matrix.rows();
            if (blk.matrix.cols() != n || blk.offset < 0 || blk.offset + n > n_vars)
                throw InputError("qcqp: constraint " + std::to_string(i) + " has an out-of-range block");
            if ((blk.matrix - blk.matrix.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + blk.matrix.cwiseAbs().maxCoeff()))
                throw InputError("qcqp: constraint " + std::to_string(i) + " has a non-symmetric block");
            Eigen::SelfAdjointEigenSolver<RMat> eig(blk.matrix, Eigen::EigenvaluesOnly);
            if (eig.eigenvalues().minCoeff() < -1e-9)
                throw InputError("qcqp: constraint " + std::to_string(i) + " is not convex (Q not PSD)");
        }
    }
}

Problem Problem::normalized() const
{
    validate();
    Problem p = *this;
    p.lower_bounds.reset();
    for (auto &c : p.constraints)
        for (auto &blk : c.blocks)
        {
            blk.matrix = 0.5 * (blk.matrix + blk.matrix.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<RMat> eig(blk.matrix);
            if (eig.eigenvalues().minCoeff() < 0.0)
                blk.matrix = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
        }
    if (lower_bounds)
        for (int i = 0; i < n_vars; ++i)
        {
            // -x_i + lb_i <= 0
            if (!std::isfinite((*lower_bounds)(i)))
                continue;
            RVec a = RVec::Zero(n_vars);
            a(i) = 1.0;
            p.constraints.push_back(Constraint::linear(std::move(a), (*lower_bounds)(i)));
        }
    return p;
}

std::vector<double> Problem::values(const RVec &x) const
{
    std::vector<double> v;
    v.reserve(constraints.size());
    for (const auto &c : constraints)
        v.push_back(c.value(x));
    if (lower_bounds)
        for (int i = 0; i < n_vars; ++i)
            if (std::isfinite((*lower_bounds)(i)))
                v.push_back((*lower_bounds)(i) - x(i));
    return v;
}

double Problem::max_violation(const RVec &x) const
{
    const auto v = values(x);
    return *std::max_element(v.begin(), v.end());
}

std::string_view to_string(Status status)
{
    switch (status)
    {
    case Status::optimal: return "optimal";
    case Status::max_iter: return "max_iter";
    case Status::infeasible_start: return "infeasible_start";
    }
    return "unknown";
}

// ---------- Barrier solver ----------

namespace
{

struct Barrier
{
    const Problem &p; // normalized
    double t = 1.0;

    // Returns +inf outside the strict interior.
    double value(const RVec &x, std::vector<double> &g) const
    {
        double f = -t * p.objective.dot(x);
        for (std::size_t i = 0; i < p.constraints.size(); ++i)
        {
            g[i] = p.constraints[i].value(x);
            if (!(g[i] < 0.0))
                return std::numeric_limits<double>::infinity();
            f -= std::log(-g[i]);
        }
        return f;
    }
};

RVec solve_newton_system(RMat &hessian, const RVec &rhs)
{
    Eigen::LLT<RMat> llt(hessian);
    if (llt.info() == Eigen::Success)
        return llt.solve(rhs);
    const double shift = 1e-12 * std::max(1.0, hessian.diagonal().cwiseAbs().maxCoeff());
    hessian.diagonal().array() += shift;
    Eigen::LDLT<RMat> ldlt(hessian);
    return ldlt.solve(rhs);
}

} // namespace

Solution solve(const Problem &problem, const RVec &x0, const Params &params)
{
    const Problem p = problem.normalized();
    const int n = p.n_vars;
    const auto m = static_cast<Eigen::Index>(p.constraints.size());
    if (x0.size() != n)
        throw InputError("qcqp::solve: x0 has wrong length");

    Solution sol;
    sol.x = x0;
    sol.duals = RVec::Zero(m);
    if (p.max_violation(x0) >= 0.0)
    {
        sol.status = Status::infeasible_start;
        sol.objective_value = p.objective.dot(x0);
        sol.kkt_residual = std::numeric_limits<double>::infinity();
        return sol;
    }

    Barrier barrier{p, params.t0};
    RVec x = x0;
    std::vector<double> g(m), g_trial(m);
    RMat grads(n, m);
    RMat hessian(n, n);
    bool gap_reached = false;

    for (int outer = 0; outer < params.max_outer; ++outer)
    {
        ++sol.barrier_iterations;
        double f = barrier.value(x, g);
        for (int it = 0; it < params.max_newton; ++it)
        {
            ++sol.newton_iterations;
            RVec grad = -barrier.t * p.objective;
            hessian.setZero();
            RVec d(m);
            for (Eigen::Index i = 0; i < m; ++i)
            {
                const double inv = -1.0 / g[i];
                grads.col(i) = p.constraints[i].gradient(x);
                grad += inv * grads.col(i);
                p.constraints[i].add_hessian(hessian, inv);
                d(i) = inv;
            }
            hessian.noalias() += grads * d.cwiseAbs2().asDiagonal() * grads.transpose();
            const RVec step = solve_newton_system(hessian, -grad);
            const double slope = grad.dot(step);
            const double decrement2 = -slope;
            if (!(decrement2 > 0.0) || 0.5 * decrement2 <= params.newton_tol)
                break;

            double s = 1.0;
            double f_trial = barrier.value(x + s * step, g_trial);
            while (f_trial > f + params.alpha * s * slope)
            {
                s *= params.beta;
                if (s < 1e-20)
                    break;
                f_trial = barrier.value(x + s * step, g_trial);
            }
            if (!std::isfinite(f_trial) || f_trial > f)
                break;
            x += s * step;
            f = f_trial;
            g = g_trial;
        }
        sol.outer_objective.push_back(p.objective.dot(x));
        const double gap = static_cast<double>(m) / barrier.t;
        if (gap <= params.newton_tol * std::abs(p.objective.dot(x)) + 1e-9)
        {
            gap_reached = true;
            break;
        }
        barrier.t *= params.mu_factor;
    }

    sol.x = x;
    sol.objective_value = p.objective.dot(x);
    for (Eigen::Index i = 0; i < m; ++i)
        sol.duals(i) = 1.0 / (barrier.t * -p.constraints[i].value(x));
    sol.kkt_residual = check_kkt(p, x, sol.duals);

    // Barrier duals carry the centring error; refit them on the near-active set.
    if (gap_reached)
    {
        const double top = std::max(1.0, sol.duals.maxCoeff());
        std::vector<Eigen::Index> active;
        for (Eigen::Index i = 0; i < m; ++i)
            if (sol.duals(i) >= 1e-6 * top)
                active.push_back(i);
        if (!active.empty())
        {
            RMat G(n, static_cast<Eigen::Index>(active.size()));
            for (std::size_t j = 0; j < active.size(); ++j)
                G.col(static_cast<Eigen::Index>(j)) = p.constraints[active[j]].gradient(x);
            const RVec fit = G.colPivHouseholderQr().solve(p.objective);
            if (fit.allFinite() && (fit.array() >= 0.0).all())
            {
                RVec refined = RVec::Zero(m);
                for (std::size_t j = 0; j < active.size(); ++j)
                    refined(active[j]) = fit(static_cast<Eigen::Index>(j));
                const double r = check_kkt(p, x, refined);
                if (r < sol.kkt_residual)
                {
                    sol.duals = refined;
                    sol.kkt_residual = r;
                }
            }
        }
    }
    sol.status = (gap_reached && sol.kkt_residual <= 1e-6) ? Status::optimal : Status::max_iter;
    return sol;
}

std::optional<RVec> find_strictly_feasible(const Problem &problem, const std::optional<RVec> &hint)
{
    const Problem p = problem.normalized();
    const int n = p.n_vars;
    const RVec x0 = hint ? *hint : RVec::Zero(n);
    if (x0.size() != n)
        throw InputError("find_strictly_feasible: hint has wrong length");
    const double worst = p.max_violation(x0);
    if (worst < 0.0)
        return x0;

    // Auxiliary problem over z = [x; s]: maximise -s s.t. g_i(x) - s <= 0,
    // s >= -1, ||x - x0||^2 <= R^2.
    Problem aux;
    aux.n_vars = n + 1;
    aux.objective = RVec::Zero(n + 1);
    aux.objective(n) = -1.0;
    for (const auto &c : p.constraints)
    {
        Constraint e;
        e.blocks = c.blocks;
        e.a = RVec::Zero(n + 1);
        e.a.head(n) = c.a;
        e.a(n) = 1.0;
        e.b = c.b;
        aux.constraints.push_back(std::move(e));
    }
    RVec cap = RVec::Zero(n + 1);
    cap(n) = 1.0;
    aux.constraints.push_back(Constraint::linear(cap, -1.0));
    const double radius = 1e4 * (1.0 + x0.cwiseAbs().maxCoeff());
    Constraint box;
    box.blocks.push_back({0, RMat::Identity(n, n)});
    box.a = RVec::Zero(n + 1);
    box.a.head(n) = 2.0 * x0;
    box.b = x0.squaredNorm() - radius * radius;
    aux.constraints.push_back(std::move(box));

    RVec z0(n + 1);
    z0.head(n) = x0;
    z0(n) = worst + 1.0;
    // start the path where the barrier and the infeasibility have comparable scale
    Params params;
    params.newton_tol = 1e-8;
    params.t0 = 1.0 / (1.0 + std::abs(worst));
    params.max_newton = 200;
    const Solution sol = solve(aux, z0, params);
    if (sol.status == Status::infeasible_start)
        return std::nullopt;
    RVec x = sol.x.head(n);
    if (!(p.max_violation(x) < 0.0))
        return std::nullopt;
    return x;
}

double check_kkt(const Problem &problem, const RVec &x, const RVec &duals)
{
    const Problem p = problem.lower_bounds ? problem.normalized() : problem;
    const auto m = static_cast<Eigen::Index>(p.constraints.size());
    if (duals.size() != m)
        throw InputError("check_kkt: one dual per constraint required");
    if ((duals.array() < 0.0).any())
        throw InputError("check_kkt: duals must be nonnegative");
    RVec stationarity = -p.objective;
    double complementarity = 0.0;
    double violation = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const double gi = p.constraints[i].value(x);
        stationarity += duals(i) * p.constraints[i].gradient(x);
        complementarity = std::max(complementarity, std::abs(duals(i) * gi));
        violation = std::max(violation, gi);
    }
    return std::max({stationarity.cwiseAbs().maxCoeff(), complementarity, violation});
}

void write_text(std::ostream &out, const Problem &problem)
{
    const int n = problem.n_vars;
    const auto old_precision = out.precision(17);
    out << "qcqp " << n << ' ' << problem.constraints.size() << '\n';
    out << "objective\n" << problem.objective.transpose() << '\n';
    for (std::size_t i = 0; i < problem.constraints.size(); ++i)
    {
        const auto &c = problem.constraints[i];
        out << "constraint " << i << '\n';
        out << problem.constraints[i].dense_q(n) << '\n';
        out << c.a.transpose() << '\n' << c.b << '\n';
    }
    if (problem.lower_bounds)
        out << "lower_bounds\n" << problem.lower_bounds->transpose() << '\n';
    out.precision(old_precision);
}

} // namespace strsma::qcqp
