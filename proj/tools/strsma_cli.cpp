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

#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "criteria.hpp"
#include "strsma/channel.hpp"
#include "strsma/harness.hpp"
#include "strsma/wmmse.hpp"

namespace
{

enum Exit
{
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_solver = 3,
    exit_validation = 4
};

void progress_line(int done, int total)
{
    if (done == total || done % 10 == 0)
        std::cerr << "\r" << done << "/" << total << " trials" << (done == total ? "\n" : "") << std::flush;
}

int write_outputs(const strsma::ScenarioConfig &config, const strsma::ResultTable &table, const std::string &out,
                  const std::string &manifest, const std::string &aggregate)
{
    if (out.empty() || out == "-")
        strsma::emit_csv(std::cout, table);
    else
        strsma::write_file(out, strsma::to_csv(table));

    std::string manifest_path = manifest;
    if (manifest_path.empty() && !out.empty() && out != "-")
        manifest_path = out + ".manifest.json";
    if (!manifest_path.empty())
        strsma::write_file(manifest_path, strsma::run_manifest(config, table));

    if (!aggregate.empty())
    {
        std::ostringstream s;
        strsma::emit_aggregate_csv(s, strsma::aggregate(table));
        strsma::write_file(aggregate, s.str());
    }
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"strsma: space-time rate-splitting precoder lab for multibeam LEO downlinks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", strsma::version_string);

    std::string config_path, out_path, manifest_path, aggregate_path;
    int workers = 0;
    bool quiet = false;
    bool slot_units = false;

    auto *simulate = app.add_subcommand("simulate", "Run the experiment described by a JSON config");
    simulate->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out_path, "CSV output path (stdout when omitted)");
    simulate->add_option("--manifest", manifest_path, "JSON run manifest path (default: <out>.manifest.json)");
    simulate->add_option("--aggregate", aggregate_path, "Per-cell mean/std/min/max CSV path");
    simulate->add_option("--workers", workers, "Concurrent trials (overrides the config)")->check(CLI::PositiveNumber);
    simulate->add_flag("--quiet", quiet, "No progress output");
    simulate->add_flag("--per-slot", slot_units, "Report rates per symbol slot (half the per-block values)");

    std::string axis;
    std::vector<double> values;
    auto *sweep_cmd = app.add_subcommand("sweep", "Sweep one axis of a config");
    sweep_cmd->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--axis", axis, "sigma_e, k_users, n_t or p_t (p_t values in dBm)")->required();
    sweep_cmd->add_option("--values", values, "Comma-separated axis values")->required()->delimiter(',');
    sweep_cmd->add_option("--out", out_path, "CSV output path (stdout when omitted)");
    sweep_cmd->add_option("--manifest", manifest_path, "JSON run manifest path (default: <out>.manifest.json)");
    sweep_cmd->add_option("--aggregate", aggregate_path, "Per-cell mean/std/min/max CSV path");
    sweep_cmd->add_option("--workers", workers, "Concurrent trials (overrides the config)")->check(CLI::PositiveNumber);
    sweep_cmd->add_flag("--quiet", quiet, "No progress output");
    sweep_cmd->add_flag("--per-slot", slot_units, "Report rates per symbol slot (half the per-block values)");

    double scs = 0.0, cp = 0.0, doppler = 0.0, resolution = 10e-9;
    bool as_json = false;
    auto *feasibility = app.add_subcommand("feasibility", "Alamouti block timing check under NTN numerology");
    feasibility->add_option("--scs", scs, "Subcarrier spacing [Hz]")->required();
    feasibility->add_option("--cp", cp, "Cyclic-prefix fraction of the symbol duration")->required();
    feasibility->add_option("--doppler", doppler, "Residual Doppler shift [Hz]")->required();
    feasibility->add_option("--resolution", resolution,
                            "Symbol-duration quantisation [s] before the CP is added; 0 = exact")
        ->capture_default_str();
    feasibility->add_flag("--json", as_json, "Print JSON instead of text");

    strsma::checks::Options check_options;
    std::vector<int> only;
    auto *validate = app.add_subcommand("validate", "Run the invariant and oracle suite");
    validate->add_option("--trials", check_options.trend_trials, "Trials per cell for the trend checks")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    validate->add_option("--samples", check_options.trend_samples, "SAA samples for the trend checks")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    validate->add_option("--workers", check_options.workers, "Concurrent trials for the trend checks")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    validate->add_option("--only", only, "Comma-separated check ids")->delimiter(',');

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try
    {
        if (simulate->parsed() || sweep_cmd->parsed())
        {
            strsma::ScenarioConfig config = strsma::load_config(config_path);
            if (workers > 0)
                config.workers = workers;
            if (sweep_cmd->parsed())
            {
                config.sweep = strsma::SweepSpec{axis, values};
                config.validate();
            }
            std::function<void(int, int)> progress;
            if (!quiet)
                progress = progress_line;
            strsma::ResultTable table = strsma::sweep(config, progress);
            if (slot_units)
                table = strsma::per_slot(table);
            return write_outputs(config, table, out_path, manifest_path, aggregate_path);
        }
        if (feasibility->parsed())
        {
            const strsma::NtnReport r = strsma::ntn_feasibility(scs, cp, doppler, resolution);
            std::cout << (as_json ? strsma::format_json(r) + "\n" : strsma::format_text(r));
            return exit_ok;
        }
        if (validate->parsed())
        {
            check_options.cli_path = std::filesystem::read_symlink("/proc/self/exe").string();
            const auto results = strsma::checks::run(check_options, std::cout, only);
            int failed = 0;
            for (const auto &r : results)
                failed += r.pass ? 0 : 1;
            std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
            return failed == 0 ? exit_ok : exit_validation;
        }
    }
    catch (const strsma::SolverError &e)
    {
        std::cerr << "solver failure: " << e.what() << "\n";
        return exit_solver;
    }
    catch (const strsma::InputError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_ok;
}
