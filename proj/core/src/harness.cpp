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

#include "strsma/harness.hpp"
#include "strsma/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace strsma
{

const char *const version_string = "0.1.0";
const char *const csv_schema = "sweep_axis,sweep_value,mode,trial,min_se,q,iterations,runtime_ms";

namespace
{

using nlohmann::json;

const std::set<std::string> known_axes = {"sigma_e", "k_users", "n_t", "p_t"};

void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where)
{
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T> T get_as(const json &j, const std::string &key)
{
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

int int_value(double v, const std::string &axis)
{
    if (std::floor(v) != v)
        throw ConfigError("axis " + axis + " needs integer values, got " + std::to_string(v));
    return static_cast<int>(v);
}

std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> split(const std::string &line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep))
        out.push_back(cell);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

} // namespace

// ---------- Config ----------

void ScenarioConfig::validate() const
{
    try
    {
        geometry.validate();
    }
    catch (const InputError &e)
    {
        throw ConfigError(e.what());
    }
    if (n_t < 1)
        throw ConfigError("n_t must be >= 1");
    if (k_users < 1)
        throw ConfigError("k_users must be >= 1");
    if (!(p_t > 0.0) || !std::isfinite(p_t))
        throw ConfigError("p_t must be positive");
    if (sigma_e.empty())
        throw ConfigError("sigma_e list must not be empty");
    for (double s : sigma_e)
        if (!(s >= 0.0) || !std::isfinite(s))
            throw ConfigError("sigma_e values must be nonnegative");
    if (s_samples < 1)
        throw ConfigError("s_samples must be >= 1");
    if (heldout_samples < 1)
        throw ConfigError("heldout_samples must be >= 1");
    if (n_trials < 1)
        throw ConfigError("n_trials must be >= 1");
    if (modes.empty())
        throw ConfigError("modes list must not be empty");
    if (!(eps > 0.0))
        throw ConfigError("eps must be positive");
    if (max_iter < 1)
        throw ConfigError("max_iter must be >= 1");
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
    if (sweep)
    {
        if (!known_axes.count(sweep->axis))
            throw ConfigError("unknown sweep axis '" + sweep->axis + "' (expected sigma_e, k_users, n_t or p_t)");
        if (sweep->values.empty())
            throw ConfigError("sweep values must not be empty");
        for (double v : sweep->values)
            apply_axis(*this, sweep->axis, v);
    }
    const SweepSpec s = effective_sweep();
    for (double v : s.values)
    {
        const ScenarioConfig c = s.axis == "sigma_e" ? *this : apply_axis(*this, s.axis, v);
        for (Mode m : modes)
            if (m == Mode::st_rsma && c.n_t < 2)
                throw ConfigError("ST_RSMA needs n_t >= 2");
    }
}

SweepSpec ScenarioConfig::effective_sweep() const
{
    if (sweep)
        return *sweep;
    return {"sigma_e", sigma_e};
}

ScenarioConfig apply_axis(const ScenarioConfig &config, const std::string &axis, double value)
{
    ScenarioConfig c = config;
    if (axis == "sigma_e")
    {
        if (!(value >= 0.0))
            throw ConfigError("sigma_e values must be nonnegative");
        c.sigma_e = {value};
    }
    else if (axis == "k_users")
    {
        c.k_users = int_value(value, axis);
        if (c.k_users < 1)
            throw ConfigError("k_users values must be >= 1");
    }
    else if (axis == "n_t")
    {
        c.n_t = int_value(value, axis);
        if (c.n_t < 1)
            throw ConfigError("n_t values must be >= 1");
    }
    else if (axis == "p_t")
    {
        // p_t sweeps are given in dBm, matching the SNR axis of the power plots
        c.p_t = dbm_to_watts(value);
    }
    else
        throw ConfigError("unknown sweep axis '" + axis + "' (expected sigma_e, k_users, n_t or p_t)");
    return c;
}

ScenarioConfig parse_config(const std::string &json_text)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");

    reject_unknown(j,
                   {"geometry", "n_t", "k_users", "p_t_w", "p_t_dbm", "sigma_e", "s_samples", "heldout_samples",
                    "n_trials", "modes", "eps", "max_iter", "master_seed", "sweep", "workers"},
                   "config");

    ScenarioConfig c;
    if (j.contains("geometry"))
    {
        const json &g = j["geometry"];
        if (!g.is_object())
            throw ConfigError("geometry must be an object");
        reject_unknown(g,
                       {"altitude_m", "beam_radius_m", "theta_3db_deg", "carrier_frequency_hz", "bandwidth_hz",
                        "max_tx_gain_dbi", "rx_gain_dbi", "system_noise_temp_k"},
                       "geometry");
        if (g.contains("altitude_m"))
            c.geometry.altitude = get_as<double>(g, "altitude_m");
        if (g.contains("beam_radius_m"))
            c.geometry.beam_radius = get_as<double>(g, "beam_radius_m");
        if (g.contains("theta_3db_deg"))
            c.geometry.theta_3db = get_as<double>(g, "theta_3db_deg") * pi / 180.0;
        if (g.contains("carrier_frequency_hz"))
            c.geometry.carrier_frequency = get_as<double>(g, "carrier_frequency_hz");
        if (g.contains("bandwidth_hz"))
            c.geometry.bandwidth = get_as<double>(g, "bandwidth_hz");
        if (g.contains("max_tx_gain_dbi"))
            c.geometry.max_tx_gain = db_to_linear(get_as<double>(g, "max_tx_gain_dbi"));
        if (g.contains("rx_gain_dbi"))
            c.geometry.rx_gain = db_to_linear(get_as<double>(g, "rx_gain_dbi"));
        if (g.contains("system_noise_temp_k"))
            c.geometry.system_noise_temp = get_as<double>(g, "system_noise_temp_k");
    }
    if (j.contains("n_t"))
        c.n_t = get_as<int>(j, "n_t");
    if (j.contains("k_users"))
        c.k_users = get_as<int>(j, "k_users");
    if (j.contains("p_t_w") && j.contains("p_t_dbm"))
        throw ConfigError("give either p_t_w or p_t_dbm, not both");
    if (j.contains("p_t_w"))
        c.p_t = get_as<double>(j, "p_t_w");
    if (j.contains("p_t_dbm"))
        c.p_t = dbm_to_watts(get_as<double>(j, "p_t_dbm"));
    if (j.contains("sigma_e"))
    {
        if (j["sigma_e"].is_number())
            c.sigma_e = {get_as<double>(j, "sigma_e")};
        else
            c.sigma_e = get_as<std::vector<double>>(j, "sigma_e");
    }
    if (j.contains("s_samples"))
        c.s_samples = get_as<int>(j, "s_samples");
    if (j.contains("heldout_samples"))
        c.heldout_samples = get_as<int>(j, "heldout_samples");
    if (j.contains("n_trials"))
        c.n_trials = get_as<int>(j, "n_trials");
    if (j.contains("modes"))
    {
        c.modes.clear();
        try
        {
            for (const auto &name : get_as<std::vector<std::string>>(j, "modes"))
                c.modes.push_back(mode_from_string(name));
        }
        catch (const ConfigError &)
        {
            throw;
        }
        catch (const InputError &e)
        {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("eps"))
        c.eps = get_as<double>(j, "eps");
    if (j.contains("max_iter"))
        c.max_iter = get_as<int>(j, "max_iter");
    if (j.contains("master_seed"))
        c.master_seed = get_as<std::uint64_t>(j, "master_seed");
    if (j.contains("workers"))
        c.workers = get_as<int>(j, "workers");
    if (j.contains("sweep"))
    {
        const json &s = j["sweep"];
        if (!s.is_object())
            throw ConfigError("sweep must be an object");
        reject_unknown(s, {"axis", "values"}, "sweep");
        SweepSpec spec;
        spec.axis = get_as<std::string>(s, "axis");
        spec.values = get_as<std::vector<double>>(s, "values");
        c.sweep = spec;
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig &c)
{
    json j;
    j["geometry"] = {{"altitude_m", c.geometry.altitude},
                     {"beam_radius_m", c.geometry.beam_radius},
                     {"theta_3db_deg", c.geometry.theta_3db * 180.0 / pi},
                     {"carrier_frequency_hz", c.geometry.carrier_frequency},
                     {"bandwidth_hz", c.geometry.bandwidth},
                     {"max_tx_gain_dbi", 10.0 * std::log10(c.geometry.max_tx_gain)},
                     {"rx_gain_dbi", 10.0 * std::log10(c.geometry.rx_gain)},
                     {"system_noise_temp_k", c.geometry.system_noise_temp}};
    j["n_t"] = c.n_t;
    j["k_users"] = c.k_users;
    j["p_t_w"] = c.p_t;
    j["sigma_e"] = c.sigma_e;
    j["s_samples"] = c.s_samples;
    j["heldout_samples"] = c.heldout_samples;
    j["n_trials"] = c.n_trials;
    std::vector<std::string> modes;
    for (Mode m : c.modes)
        modes.emplace_back(to_string(m));
    j["modes"] = modes;
    j["eps"] = c.eps;
    j["max_iter"] = c.max_iter;
    j["master_seed"] = c.master_seed;
    j["workers"] = c.workers;
    if (c.sweep)
        j["sweep"] = {{"axis", c.sweep->axis}, {"values", c.sweep->values}};
    return j.dump(2);
}

// ---------- Trials ----------

std::uint64_t trial_seed(std::uint64_t master_seed, int trial)
{
    return derive_seed(master_seed, {static_cast<std::uint64_t>(Stream::trial), static_cast<std::uint64_t>(trial)});
}

ChannelSet trial_channels(const ScenarioConfig &config, double sigma_e, std::uint64_t seed)
{
    const UserPlacement placement = place_users(config.geometry, config.n_t, config.k_users, seed);
    ChannelSet channels = synth_channel(config.geometry, placement, config.n_t);
    channels = impair_csit(std::move(channels), sigma_e, seed);
    return draw_saa_samples(std::move(channels), config.s_samples, seed);
}

ResultRow run_trial(const ScenarioConfig &config, const std::string &sweep_axis, double sweep_value, Mode mode,
                    int trial)
{
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = trial_seed(config.master_seed, trial);
    const std::uint64_t heldout_seed = derive_seed(seed, {static_cast<std::uint64_t>(Stream::heldout)});
    const double sigma_e = config.sigma_e.front();

    ResultRow row;
    row.sweep_axis = sweep_axis;
    row.sweep_value = sweep_value;
    row.mode = mode;
    row.trial = trial;

    const ChannelSet channels = trial_channels(config, sigma_e, seed);
    RateReport report;
    if (mode == Mode::frr)
    {
        const ChannelSet fresh = draw_saa_samples(channels, config.heldout_samples, heldout_seed);
        report = frr_rate(channels, config.p_t, fresh.samples);
        row.q = report.min_total();
        row.iterations = 0;
    }
    else
    {
        MaxMinParams params;
        params.p_t = config.p_t;
        params.heldout_samples = config.heldout_samples;
        params.eps = config.eps;
        params.max_iter = config.max_iter;
        params.seed = heldout_seed;
        MaxMinResult result;
        try
        {
            result = solve_maxmin(channels, mode, params);
        }
        catch (const SolverError &e)
        {
            std::ostringstream msg;
            msg << e.what() << " [mode " << to_string(mode) << ", " << sweep_axis << " = " << sweep_value
                << ", trial " << trial << ", trial seed " << seed << "]";
            throw SolverError(msg.str());
        }
        report = result.heldout;
        row.q = result.solution.q;
        row.iterations = result.solution.iterations;
    }
    row.se.assign(report.total.data(), report.total.data() + report.total.size());
    row.min_se = *std::min_element(row.se.begin(), row.se.end());
    row.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return row;
}

ResultTable sweep(const ScenarioConfig &config, const std::function<void(int, int)> &progress)
{
    config.validate();
    const SweepSpec spec = config.effective_sweep();
    if (!known_axes.count(spec.axis))
        throw ConfigError("unknown sweep axis '" + spec.axis + "'");

    struct Job
    {
        ScenarioConfig config;
        double value;
        Mode mode;
        int trial;
    };
    std::vector<Job> jobs;
    for (double v : spec.values)
    {
        const ScenarioConfig c = apply_axis(config, spec.axis, v);
        for (Mode m : config.modes)
            for (int t = 0; t < config.n_trials; ++t)
                jobs.push_back({c, v, m, t});
    }

    ResultTable table;
    table.rows.resize(jobs.size());
    const int total = static_cast<int>(jobs.size());
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::mutex mutex;
    std::exception_ptr failure;

    auto worker = [&]() {
        for (;;)
        {
            const int i = next.fetch_add(1);
            if (i >= total)
                return;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (failure)
                    return;
            }
            try
            {
                const Job &job = jobs[i];
                table.rows[i] = run_trial(job.config, spec.axis, job.value, job.mode, job.trial);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (!failure)
                    failure = std::current_exception();
                return;
            }
            const int d = ++done;
            if (progress)
            {
                std::lock_guard<std::mutex> lock(mutex);
                progress(d, total);
            }
        }
    };

    const int n_workers = std::min(config.workers, std::max(total, 1));
    if (n_workers <= 1)
        worker();
    else
    {
        std::vector<std::thread> threads;
        for (int w = 0; w < n_workers; ++w)
            threads.emplace_back(worker);
        for (auto &t : threads)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return table;
}

// ---------- Aggregation ----------

std::vector<AggregateRow> aggregate(const ResultTable &table)
{
    std::vector<AggregateRow> out;
    std::map<std::pair<std::string, std::pair<double, int>>, std::size_t> index;
    std::vector<std::vector<double>> values;
    for (const auto &row : table.rows)
    {
        const auto key = std::make_pair(row.sweep_axis, std::make_pair(row.sweep_value, static_cast<int>(row.mode)));
        auto it = index.find(key);
        if (it == index.end())
        {
            it = index.emplace(key, out.size()).first;
            AggregateRow a;
            a.sweep_axis = row.sweep_axis;
            a.sweep_value = row.sweep_value;
            a.mode = row.mode;
            out.push_back(a);
            values.emplace_back();
        }
        values[it->second].push_back(row.min_se);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        const auto &v = values[i];
        auto &a = out[i];
        a.n = static_cast<int>(v.size());
        double sum = 0.0;
        for (double x : v)
            sum += x;
        a.mean = sum / a.n;
        double ss = 0.0;
        for (double x : v)
            ss += (x - a.mean) * (x - a.mean);
        a.std = a.n > 1 ? std::sqrt(ss / (a.n - 1)) : 0.0;
        a.min = *std::min_element(v.begin(), v.end());
        a.max = *std::max_element(v.begin(), v.end());
    }
    return out;
}

double mean_min_se(const ResultTable &table, double sweep_value, Mode mode)
{
    for (const auto &a : aggregate(table))
        if (a.sweep_value == sweep_value && a.mode == mode)
            return a.mean;
    throw InputError("no rows for " + std::string(to_string(mode)) + " at sweep value " + fmt9(sweep_value));
}

// ---------- Emission ----------

ResultTable per_slot(const ResultTable &table)
{
    ResultTable out = table;
    for (auto &row : out.rows)
    {
        row.min_se *= 0.5;
        row.q *= 0.5;
        for (double &v : row.se)
            v *= 0.5;
    }
    return out;
}

std::string csv_header(int max_users)
{
    std::string header = csv_schema;
    for (int k = 1; k <= max_users; ++k)
        header += ",se_" + std::to_string(k);
    return header;
}

void emit_csv(std::ostream &out, const ResultTable &table)
{
    if (table.rows.empty())
        throw InputError("emit: result table is empty");
    std::size_t max_users = 0;
    for (const auto &row : table.rows)
        max_users = std::max(max_users, row.se.size());
    out << csv_header(static_cast<int>(max_users)) << '\n';
    for (const auto &row : table.rows)
    {
        out << row.sweep_axis << ',' << fmt9(row.sweep_value) << ',' << to_string(row.mode) << ',' << row.trial << ','
            << fmt9(row.min_se) << ',' << fmt9(row.q) << ',' << row.iterations << ',' << fmt9(row.runtime_ms);
        for (std::size_t k = 0; k < max_users; ++k)
        {
            out << ',';
            if (k < row.se.size())
                out << fmt9(row.se[k]);
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("emit: write failed");
}

std::string to_csv(const ResultTable &table)
{
    std::ostringstream ss;
    emit_csv(ss, table);
    return ss.str();
}

ResultTable parse_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("parse_csv: missing header");
    const auto header = split(line, ',');
    const auto fixed = split(csv_schema, ',');
    if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin()))
        throw InputError("parse_csv: header does not match schema");
    const std::size_t n_users = header.size() - fixed.size();

    ResultTable table;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw InputError("parse_csv: row has " + std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        ResultRow row;
        try
        {
            row.sweep_axis = cells[0];
            row.sweep_value = std::stod(cells[1]);
            row.mode = mode_from_string(cells[2]);
            row.trial = std::stoi(cells[3]);
            row.min_se = std::stod(cells[4]);
            row.q = std::stod(cells[5]);
            row.iterations = std::stoi(cells[6]);
            row.runtime_ms = std::stod(cells[7]);
            for (std::size_t k = 0; k < n_users; ++k)
                if (!cells[fixed.size() + k].empty())
                    row.se.push_back(std::stod(cells[fixed.size() + k]));
        }
        catch (const std::logic_error &e)
        {
            throw InputError("parse_csv: bad cell in line '" + line + "'");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void emit_aggregate_csv(std::ostream &out, const std::vector<AggregateRow> &rows)
{
    out << "sweep_axis,sweep_value,mode,n,mean_min_se,std_min_se,min_min_se,max_min_se\n";
    for (const auto &a : rows)
        out << a.sweep_axis << ',' << fmt9(a.sweep_value) << ',' << to_string(a.mode) << ',' << a.n << ','
            << fmt9(a.mean) << ',' << fmt9(a.std) << ',' << fmt9(a.min) << ',' << fmt9(a.max) << '\n';
}

std::string to_json(const ResultTable &table)
{
    json rows = json::array();
    for (const auto &r : table.rows)
        rows.push_back({{"sweep_axis", r.sweep_axis},
                        {"sweep_value", r.sweep_value},
                        {"mode", std::string(to_string(r.mode))},
                        {"trial", r.trial},
                        {"min_se", r.min_se},
                        {"q", r.q},
                        {"iterations", r.iterations},
                        {"runtime_ms", r.runtime_ms},
                        {"se", r.se}});
    return rows.dump(2);
}

std::string run_manifest(const ScenarioConfig &config, const ResultTable &table)
{
    json j;
    j["tool"] = "strsma";
    j["version"] = version_string;
    j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp_utc"] = stamp;
    j["config"] = json::parse(config_to_json(config));
    j["master_seed"] = config.master_seed;
    std::vector<std::uint64_t> seeds;
    for (int t = 0; t < config.n_trials; ++t)
        seeds.push_back(trial_seed(config.master_seed, t));
    j["trial_seeds"] = seeds;
    j["randomness"] = "placement, feed phases, CSIT error and SAA samples are redrawn per trial; every mode and "
                      "sweep value of a trial index shares that trial's seed; held-out samples use a separate "
                      "substream";
    j["rates"] = "per-user SE columns are held-out SAA rates with common portions water-filled under min_k R_c,k; "
                 "q is the in-sample optimisation value; FRR uses a matched filter on the estimate with a 1/K "
                 "resource share; MULTICAST splits the common rate equally";
    j["rows"] = table.rows.size();
    return j.dump(2);
}

void write_file(const std::string &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace strsma
