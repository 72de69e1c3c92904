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

#ifndef strsma_channel_H
#define strsma_channel_H

#include <cstdint>
#include <string>
#include <vector>

#include "strsma/types.hpp"

namespace strsma
{

inline constexpr double boltzmann = 1.380649e-23; // J/K
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double pi = 3.14159265358979323846;

double db_to_linear(double db);
double dbm_to_watts(double dbm);

// ---------- Bessel functions ----------

/// J_n(x) for integer n >= 0. Ascending series below |x| = 12, Hankel
/// asymptotic expansion above.
double bessel_j(int n, double x);

/// J_n(x) / x^n, finite and continuous at x = 0 (value 1 / (2^n n!)).
double bessel_j_scaled(int n, double x);

// ---------- Geometry and placement ----------

struct SatelliteGeometry
{
    double altitude = 600e3;                        // m
    double beam_radius = 25e3;                      // m
    double theta_3db = 4.4127 * pi / 180.0;         // rad
    double carrier_frequency = 20e9;                // Hz
    double bandwidth = 400e6;                       // Hz
    double max_tx_gain = 1122.0184543019636;        // 30.5 dBi
    double rx_gain = 9332.543007969906;             // 39.7 dBi
    double system_noise_temp = 150.0;               // K

    double wavelength() const { return speed_of_light / carrier_frequency; }
    void validate() const; // throws InputError
};

/// Per-user distance plus per-(user, feed) off-boresight angle and phase.
/// Row k of angles/phases belongs to user k; column n to feed n.
struct UserPlacement
{
    RVec distance; // K
    RMat angle;    // K x N_t, rad
    RMat phase;    // K x N_t, rad in [0, 2 pi)

    int k_users() const { return static_cast<int>(distance.size()); }
    int n_t() const { return static_cast<int>(angle.cols()); }
};

/// Beam centres on the ground plane: the N_t hexagonal-lattice sites nearest
/// the origin (spacing sqrt(3) * beam_radius), re-centred on their centroid.
/// Returned as N_t x 2 (x, y) in metres.
RMat beam_centers(const SatelliteGeometry &geometry, int n_t);

/// User k is dropped uniformly inside the footprint disc of beam (k mod N_t).
/// The satellite sits above the centroid of the beam centres; angles are the
/// exact angles at the satellite on a flat ground plane. Phases are i.i.d.
/// uniform in [0, 2 pi).
UserPlacement place_users(const SatelliteGeometry &geometry, int n_t, int k_users, std::uint64_t seed);

// ---------- Channel synthesis ----------

/// G_Tx^max [J1(mu)/(2 mu) + 36 J3(mu)/mu^3]^2 with mu = 2.07123 sin(theta) / sin(theta_3db).
double beam_gain(double theta, double theta_3db, double max_tx_gain);

/// Noise-normalised feed-to-user channel coefficient.
cdouble channel_element(const SatelliteGeometry &geometry, double theta, double distance, double phase);

struct ChannelSet
{
    std::vector<CVec> h_true;    // K vectors of length N_t
    std::vector<CVec> h_est;     // filled by impair_csit
    std::vector<CMat> error_cov; // Phi_k
    std::vector<CMat> samples;   // K matrices, N_t x S, column s = h_k^(s)

    int k_users() const { return static_cast<int>(h_true.size()); }
    int n_t() const { return h_true.empty() ? 0 : static_cast<int>(h_true.front().size()); }
    int n_samples() const { return samples.empty() ? 0 : static_cast<int>(samples.front().cols()); }
};

/// True channels only. Throws InputError when placement does not have n_t feeds.
ChannelSet synth_channel(const SatelliteGeometry &geometry, const UserPlacement &placement, int n_t);

/// e_k ~ CN(0, sigma_e^2 I); h_est = h_true - e_k.
ChannelSet impair_csit(ChannelSet channels, double sigma_e, std::uint64_t seed);

/// e_k ~ CN(0, Phi_k) with a full Hermitian PSD covariance per user.
ChannelSet impair_csit(ChannelSet channels, const std::vector<CMat> &covariances, std::uint64_t seed);

/// h_k^(s) = h_est[k] + e_k^(s), e_k^(s) ~ CN(0, Phi_k); one substream per (user, sample).
ChannelSet draw_saa_samples(ChannelSet channels, int n_samples, std::uint64_t seed);

/// Hermitian square root factor L with L L^H = cov. Throws InputError if cov is
/// not Hermitian PSD (eigenvalues below -1e-9 relative are rejected).
CMat covariance_factor(const CMat &cov);

// ---------- 3GPP NTN timing feasibility ----------

struct NtnReport
{
    double symbol_duration = 0.0;       // s
    double total_symbol_duration = 0.0; // s, including CP
    double coherence_time = 0.0;        // s, Clarke's model
    bool st_block_feasible = false;     // two CP-extended symbols fit in the coherence time
};

/// Clarke's-model coherence time constant sqrt(9 / (16 pi)) ~ 0.423.
double clarke_coherence_constant();

/// `symbol_resolution` quantises 1/scs (seconds) before the CP is applied, the
/// way the NTN numerology tables quote symbol durations (10 ns). Pass 0 for
/// unquantised arithmetic.
NtnReport ntn_feasibility(double scs, double cp_fraction, double residual_doppler, double symbol_resolution = 10e-9);

std::string format_text(const NtnReport &report);
std::string format_json(const NtnReport &report);

} // namespace strsma

#endif
