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

#ifndef strsma_harness_H
#define strsma_harness_H

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "strsma/channel.hpp"
#include "strsma/types.hpp"
#include "strsma/wmmse.hpp"

namespace strsma
{

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public InputError
{
  public:
    using InputError::InputError;
};

struct SweepSpec
{
    std::string axis = "sigma_e"; // sigma_e | k_users | n_t | p_t
    std::vector<double> values;
};

/// One experiment. Powers are linear watts; JSON input may use p_t_dbm.
struct ScenarioConfig
{
    SatelliteGeometry geometry;
    int n_t = 2;
    int k_users = 4;
    double p_t = 1.0; // 30 dBm
    std::vector<double> sigma_e = {0.0};
    int s_samples = 100;
    int heldout_samples = 100;
    int n_trials = 100;
    std::vector<Mode> modes = {Mode::st_rsma, Mode::rsma, Mode::sdma};
    double eps = 1e-4;
    int max_iter = 200;
    std::uint64_t master_seed = 1;
    std::optional<SweepSpec> sweep;
    int workers = 1;

    void validate() const; // throws ConfigError

    /// The sweep that will actually run: the explicit sweep if present,
    /// otherwise axis sigma_e over the sigma_e list.
    SweepSpec effective_sweep() const;
};

/// JSON document -> config. Unknown keys anywhere are rejected.
ScenarioConfig parse_config(const std::string &json_text);
ScenarioConfig load_config(const std::string &path);
std::string config_to_json(const ScenarioConfig &config);

/// Copy of `config` with one sweep axis set to `value`.
ScenarioConfig apply_axis(const ScenarioConfig &config, const std::string &axis, double value);

struct ResultRow
{
    std::string sweep_axis;
    double sweep_value = 0.0;
    Mode mode = Mode::st_rsma;
    int trial = 0;
    double min_se = 0.0;
    double q = 0.0;
    int iterations = 0;
    double runtime_ms = 0.0;
    std::vector<double> se; // per-user held-out SE

    bool operator==(const ResultRow &) const = default;
};

struct ResultTable
{
    std::vector<ResultRow> rows;
};

/// Seed shared by every mode and sweep value of one trial index, so mode and
/// sigma_e comparisons are paired on the same placement, phases and errors.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Channels of one trial: placement, synthesis, CSIT error, SAA samples.
ChannelSet trial_channels(const ScenarioConfig &config, double sigma_e, std::uint64_t seed);

/// The sweep axis and value only label the row; `config` must already have
/// them applied (see apply_axis).
ResultRow run_trial(const ScenarioConfig &config, const std::string &sweep_axis, double sweep_value, Mode mode,
                    int trial);

/// Rows ordered by (sweep value, mode, trial) regardless of worker count.
/// `progress`, when set, is called after each finished row with (done, total).
ResultTable sweep(const ScenarioConfig &config, const std::function<void(int, int)> &progress = {});

struct AggregateRow
{
    std::string sweep_axis;
    double sweep_value = 0.0;
    Mode mode = Mode::st_rsma;
    int n = 0;
    double mean = 0.0;
    double std = 0.0; // sample standard deviation (n - 1), 0 for n = 1
    double min = 0.0;
    double max = 0.0;
};

/// Statistics of min_se per (sweep value, mode), in first-appearance order.
std::vector<AggregateRow> aggregate(const ResultTable &table);

/// Mean min_se of one (sweep value, mode) cell; throws when absent.
double mean_min_se(const ResultTable &table, double sweep_value, Mode mode);

/// Copy with min_se, q and per-user SEs divided by two (per-slot units).
ResultTable per_slot(const ResultTable &table);

std::string csv_header(int max_users);
extern const char *const csv_schema; // fixed leading columns

/// Writes the schema header and one line per row, floats as %.9g.
/// Throws InputError on an empty table and std::runtime_error on stream failure.
void emit_csv(std::ostream &out, const ResultTable &table);
std::string to_csv(const ResultTable &table);
ResultTable parse_csv(std::istream &in);

void emit_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows);

/// Rows as a JSON array.
std::string to_json(const ResultTable &table);

/// Config echo, seeds, library version and a UTC timestamp.
std::string run_manifest(const ScenarioConfig &config, const ResultTable &table);

/// Writes `content` to `path`; throws std::runtime_error on I/O failure.
void write_file(const std::string &path, const std::string &content);

extern const char *const version_string;

} // namespace strsma

#endif
