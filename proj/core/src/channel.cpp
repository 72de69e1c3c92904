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

#include "strsma/channel.hpp"
#include "strsma/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace strsma
{

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// ---------- Bessel functions ----------

namespace
{
constexpr double series_limit = 12.0;

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

// 2^-n sum_k (-x^2/4)^k / (k! (n+k)!)
double scaled_series(int n, double x)
{
    const double z = -0.25 * x * x;
    double term = 1.0 / (std::ldexp(1.0, n) * factorial(n));
    double sum = term;
    for (int k = 1; k < 200; ++k)
    {
        term *= z / (static_cast<double>(k) * static_cast<double>(n + k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum))
            break;
    }
    return sum;
}

// Hankel expansion, x >= series_limit. Summation stops at the smallest term.
double asymptotic_j(int n, double x)
{
    const double mu = 4.0 * n * n;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k)
    {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        if (std::abs(term) > last)
            break;
        last = std::abs(term);
        // k odd contributes to Q, k even to P, signs alternate in pairs
        switch (k % 4)
        {
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        case 0: p += term; break;
        }
        if (last < 1e-17)
            break;
    }
    const double chi = x - (0.5 * n + 0.25) * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}
} // namespace

double bessel_j(int n, double x)
{
    if (n < 0)
        throw InputError("bessel_j: negative order");
    const double sign = (x < 0.0 && (n % 2 == 1)) ? -1.0 : 1.0;
    const double ax = std::abs(x);
    if (ax < series_limit)
        return sign * std::pow(ax, n) * scaled_series(n, ax);
    return sign * asymptotic_j(n, ax);
}

double bessel_j_scaled(int n, double x)
{
    if (n < 0)
        throw InputError("bessel_j_scaled: negative order");
    const double ax = std::abs(x);
    // J_n(-x) / (-x)^n = J_n(x) / x^n
    if (ax < series_limit)
        return scaled_series(n, ax);
    return asymptotic_j(n, ax) / std::pow(ax, n);
}

// ---------- Geometry ----------

void SatelliteGeometry::validate() const
{
    if (!(altitude > 0.0))
        throw InputError("altitude must be positive");
    if (!(beam_radius > 0.0))
        throw InputError("beam_radius must be positive");
    if (!(theta_3db > 0.0 && theta_3db < 0.5 * pi))
        throw InputError("theta_3db must lie in (0, pi/2)");
    if (!(carrier_frequency > 0.0 && bandwidth > 0.0))
        throw InputError("carrier frequency and bandwidth must be positive");
    if (!(max_tx_gain > 0.0 && rx_gain > 0.0 && system_noise_temp > 0.0))
        throw InputError("gains and noise temperature must be positive");
}

RMat beam_centers(const SatelliteGeometry &geometry, int n_t)
{
    if (n_t < 1)
        throw InputError("beam_centers: n_t must be >= 1");
    const double spacing = std::sqrt(3.0) * geometry.beam_radius;
    struct Site
    {
        double r, phi, x, y;
    };
    std::vector<Site> sites;
    const int span = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_t)))) + 2;
    for (int i = -span; i <= span; ++i)
        for (int j = -span; j <= span; ++j)
        {
            const double x = spacing * (i + 0.5 * j);
            const double y = spacing * (0.5 * std::sqrt(3.0) * j);
            const double r = std::hypot(x, y);
            double phi = std::atan2(y, x);
            if (phi < -1e-12)
                phi += 2.0 * pi;
            sites.push_back({r, phi, x, y});
        }
    const double tol = 1e-9 * spacing;
    std::sort(sites.begin(), sites.end(), [tol](const Site &a, const Site &b) {
        if (std::abs(a.r - b.r) > tol)
            return a.r < b.r;
        return a.phi < b.phi;
    });
    RMat centers(n_t, 2);
    for (int n = 0; n < n_t; ++n)
    {
        centers(n, 0) = sites[n].x;
        centers(n, 1) = sites[n].y;
    }
    centers.rowwise() -= centers.colwise().mean();
    return centers;
}

UserPlacement place_users(const SatelliteGeometry &geometry, int n_t, int k_users, std::uint64_t seed)
{
    geometry.validate();
    if (n_t < 1 || k_users < 1)
        throw InputError("place_users: n_t and k_users must be >= 1");

    const RMat centers = beam_centers(geometry, n_t);
    const double h = geometry.altitude;

    UserPlacement placement;
    placement.distance.resize(k_users);
    placement.angle.resize(k_users, n_t);
    placement.phase.resize(k_users, n_t);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < k_users; ++k)
    {
        auto engine = make_engine(seed, Stream::placement, {static_cast<std::uint64_t>(k)});
        const int beam = k % n_t;
        const double rho = geometry.beam_radius * std::sqrt(unit(engine));
        const double az = 2.0 * pi * unit(engine);
        const Eigen::Vector3d user(centers(beam, 0) + rho * std::cos(az), centers(beam, 1) + rho * std::sin(az), 0.0);
        const Eigen::Vector3d sat(0.0, 0.0, h);
        const Eigen::Vector3d to_user = user - sat;
        placement.distance(k) = to_user.norm();
        for (int n = 0; n < n_t; ++n)
        {
            const Eigen::Vector3d to_center = Eigen::Vector3d(centers(n, 0), centers(n, 1), 0.0) - sat;
            const double c = std::clamp(to_user.dot(to_center) / (to_user.norm() * to_center.norm()), -1.0, 1.0);
            placement.angle(k, n) = std::acos(c);
        }

        auto phase_engine = make_engine(seed, Stream::phase, {static_cast<std::uint64_t>(k)});
        for (int n = 0; n < n_t; ++n)
            placement.phase(k, n) = 2.0 * pi * unit(phase_engine);
    }
    return placement;
}

// ---------- Channel synthesis ----------

double beam_gain(double theta, double theta_3db, double max_tx_gain)
{
    if (theta < 0.0 || !(theta_3db > 0.0))
        throw InputError("beam_gain: theta must be >= 0 and theta_3db > 0");
    const double mu = 2.07123 * std::sin(theta) / std::sin(theta_3db);
    const double bracket = 0.5 * bessel_j_scaled(1, mu) + 36.0 * bessel_j_scaled(3, mu);
    return max_tx_gain * bracket * bracket;
}

cdouble channel_element(const SatelliteGeometry &geometry, double theta, double distance, double phase)
{
    const double gain = beam_gain(theta, geometry.theta_3db, geometry.max_tx_gain);
    const double path = 4.0 * pi * distance / geometry.wavelength();
    const double noise = std::sqrt(boltzmann * geometry.system_noise_temp * geometry.bandwidth);
    const double magnitude = std::sqrt(gain * geometry.rx_gain) / (path * noise);
    return std::polar(magnitude, -phase);
}

ChannelSet synth_channel(const SatelliteGeometry &geometry, const UserPlacement &placement, int n_t)
{
    geometry.validate();
    const int k_users = placement.k_users();
    if (placement.angle.rows() != k_users || placement.phase.rows() != k_users)
        throw InputError("synth_channel: placement rows disagree with user count");
    if (placement.angle.cols() != n_t || placement.phase.cols() != n_t)
        throw InputError("synth_channel: placement has " + std::to_string(placement.angle.cols()) + " feeds, expected " +
                         std::to_string(n_t));

    ChannelSet set;
    set.h_true.reserve(k_users);
    for (int k = 0; k < k_users; ++k)
    {
        if (placement.distance(k) < geometry.altitude * (1.0 - 1e-12))
            throw InputError("synth_channel: user distance below altitude");
        CVec h(n_t);
        for (int n = 0; n < n_t; ++n)
            h(n) = channel_element(geometry, placement.angle(k, n), placement.distance(k), placement.phase(k, n));
        set.h_true.push_back(std::move(h));
    }
    return set;
}

CMat covariance_factor(const CMat &cov)
{
    if (cov.rows() != cov.cols())
        throw InputError("covariance must be square");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw InputError("covariance is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMat> eig(cov);
    RVec lambda = eig.eigenvalues();
    if (lambda.size() > 0 && lambda.minCoeff() < -1e-9 * scale)
        throw InputError("covariance is not positive semidefinite");
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal();
}

ChannelSet impair_csit(ChannelSet channels, double sigma_e, std::uint64_t seed)
{
    if (!(sigma_e >= 0.0))
        throw InputError("sigma_e must be nonnegative");
    const int n_t = channels.n_t();
    std::vector<CMat> covs(channels.k_users(), CMat::Identity(n_t, n_t) * (sigma_e * sigma_e));
    return impair_csit(std::move(channels), covs, seed);
}

ChannelSet impair_csit(ChannelSet channels, const std::vector<CMat> &covariances, std::uint64_t seed)
{
    const int k_users = channels.k_users();
    const int n_t = channels.n_t();
    if (static_cast<int>(covariances.size()) != k_users)
        throw InputError("impair_csit: one covariance per user required");

    channels.h_est.clear();
    channels.error_cov = covariances;
    channels.samples.clear();
    for (int k = 0; k < k_users; ++k)
    {
        if (covariances[k].rows() != n_t)
            throw InputError("impair_csit: covariance dimension mismatch");
        const CMat factor = covariance_factor(covariances[k]);
        auto engine = make_engine(seed, Stream::csit_error, {static_cast<std::uint64_t>(k)});
        const CVec e = factor * standard_cn_vector(engine, n_t);
        channels.h_est.push_back(channels.h_true[k] - e);
    }
    return channels;
}

ChannelSet draw_saa_samples(ChannelSet channels, int n_samples, std::uint64_t seed)
{
    if (n_samples < 1)
        throw InputError("draw_saa_samples: S must be >= 1");
    const int k_users = channels.k_users();
    const int n_t = channels.n_t();
    if (static_cast<int>(channels.h_est.size()) != k_users || static_cast<int>(channels.error_cov.size()) != k_users)
        throw InputError("draw_saa_samples: estimated channels missing, call impair_csit first");

    channels.samples.assign(k_users, CMat(n_t, n_samples));
    for (int k = 0; k < k_users; ++k)
    {
        const CMat factor = covariance_factor(channels.error_cov[k]);
        const bool zero = factor.cwiseAbs().maxCoeff() == 0.0;
        for (int s = 0; s < n_samples; ++s)
        {
            if (zero)
            {
                channels.samples[k].col(s) = channels.h_est[k];
                continue;
            }
            auto engine = make_engine(seed, Stream::saa, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s)});
            channels.samples[k].col(s) = channels.h_est[k] + factor * standard_cn_vector(engine, n_t);
        }
    }
    return channels;
}

// ---------- NTN feasibility ----------

double clarke_coherence_constant() { return std::sqrt(9.0 / (16.0 * pi)); }

NtnReport ntn_feasibility(double scs, double cp_fraction, double residual_doppler, double symbol_resolution)
{
    if (!(scs > 0.0))
        throw InputError("subcarrier spacing must be positive");
    if (!(cp_fraction >= 0.0 && cp_fraction < 1.0))
        throw InputError("cp fraction must lie in [0, 1)");
    if (!(residual_doppler > 0.0))
        throw InputError("residual Doppler must be positive");
    if (symbol_resolution < 0.0)
        throw InputError("symbol resolution must be nonnegative");

    NtnReport report;
    report.symbol_duration = 1.0 / scs;
    if (symbol_resolution > 0.0)
        report.symbol_duration = std::round(report.symbol_duration / symbol_resolution) * symbol_resolution;
    report.total_symbol_duration = report.symbol_duration * (1.0 + cp_fraction);
    report.coherence_time = clarke_coherence_constant() / residual_doppler;
    report.st_block_feasible = 2.0 * report.total_symbol_duration <= report.coherence_time;
    return report;
}

std::string format_text(const NtnReport &report)
{
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << "symbol duration         " << report.symbol_duration * 1e6 << " us\n"
        << "symbol duration with CP " << report.total_symbol_duration * 1e6 << " us\n"
        << "ST block (2 symbols)    " << 2.0 * report.total_symbol_duration * 1e6 << " us\n"
        << "coherence time          " << report.coherence_time * 1e6 << " us\n"
        << "ST block feasible       " << (report.st_block_feasible ? "yes" : "no") << "\n";
    return out.str();
}

std::string format_json(const NtnReport &report)
{
    nlohmann::json j = {{"symbol_duration_s", report.symbol_duration},
                        {"total_symbol_duration_s", report.total_symbol_duration},
                        {"coherence_time_s", report.coherence_time},
                        {"st_block_feasible", report.st_block_feasible}};
    return j.dump(2);
}

} // namespace strsma
