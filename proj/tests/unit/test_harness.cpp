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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "strsma/harness.hpp"

using namespace strsma;

namespace
{

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.n_t = 2;
    c.k_users = 2;
    c.sigma_e = {0.0, 1.0, 2.0};
    c.s_samples = 10;
    c.heldout_samples = 20;
    c.n_trials = 5;
    c.modes = {Mode::st_rsma, Mode::sdma};
    c.master_seed = 3;
    return c;
}

} // namespace

TEST_CASE("config parsing")
{
    const ScenarioConfig c = parse_config(R"({"n_t": 3, "k_users": 4, "p_t_dbm": 40, "sigma_e": 0.5,
        "modes": ["ST_RSMA", "FRR"], "master_seed": 9, "geometry": {"altitude_m": 500000}})");
    CHECK(c.n_t == 3);
    CHECK(c.k_users == 4);
    CHECK(c.p_t == doctest::Approx(10.0));
    CHECK(c.sigma_e == std::vector<double>{0.5});
    CHECK(c.modes == std::vector<Mode>{Mode::st_rsma, Mode::frr});
    CHECK(c.master_seed == 9);
    CHECK(c.geometry.altitude == 500000.0);

    CHECK_THROWS_AS(parse_config(R"({"n_trails": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"geometry": {"height": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"p_t_w": 1, "p_t_dbm": 30})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sweep": {"axis": "bogus", "values": [1]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"modes": ["NOMA"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"n_t": 1, "modes": ["ST_RSMA"]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"k_users": "four"})"), ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);

    // echo parses back to the same experiment
    const ScenarioConfig back = parse_config(config_to_json(c));
    CHECK(back.n_t == c.n_t);
    CHECK(back.p_t == doctest::Approx(c.p_t));
    CHECK(back.modes == c.modes);
    CHECK(back.geometry.altitude == c.geometry.altitude);
}

TEST_CASE("axis application")
{
    const ScenarioConfig c = small_config();
    CHECK(apply_axis(c, "k_users", 5).k_users == 5);
    CHECK(apply_axis(c, "n_t", 4).n_t == 4);
    CHECK(apply_axis(c, "p_t", 30.0).p_t == doctest::Approx(1.0));
    CHECK(apply_axis(c, "sigma_e", 1.5).sigma_e == std::vector<double>{1.5});
    CHECK_THROWS_AS(apply_axis(c, "k_users", 2.5), ConfigError);
    CHECK_THROWS_AS(apply_axis(c, "n_trials", 2), ConfigError);
    CHECK(c.effective_sweep().axis == "sigma_e");
    CHECK(c.effective_sweep().values.size() == 3);
}

TEST_CASE("sweep rows, determinism and worker independence")
{
    ScenarioConfig c = small_config();
    const ResultTable serial = sweep(c);
    CHECK(serial.rows.size() == 30);
    for (const auto &r : serial.rows)
    {
        REQUIRE(r.se.size() == 2);
        CHECK(r.min_se == *std::min_element(r.se.begin(), r.se.end()));
        CHECK(r.sweep_axis == "sigma_e");
        CHECK(r.iterations >= 1);
    }
    // ordering: value, mode, trial
    CHECK(serial.rows[0].sweep_value == 0.0);
    CHECK(serial.rows[0].mode == Mode::st_rsma);
    CHECK(serial.rows[1].trial == 1);
    CHECK(serial.rows[5].mode == Mode::sdma);
    CHECK(serial.rows[10].sweep_value == 1.0);

    c.workers = 3;
    const ResultTable parallel = sweep(c);
    REQUIRE(parallel.rows.size() == serial.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i)
    {
        ResultRow a = serial.rows[i], b = parallel.rows[i];
        a.runtime_ms = b.runtime_ms = 0.0;
        CHECK(a == b);
    }

    int calls = 0;
    c.workers = 1;
    c.sigma_e = {0.0};
    c.n_trials = 2;
    sweep(c, [&](int done, int total) {
        ++calls;
        CHECK(done <= total);
    });
    CHECK(calls == 4);
}

TEST_CASE("trials share seeds across modes and sweep values")
{
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
    const ScenarioConfig c = small_config();
    const ChannelSet a = trial_channels(c, 0.0, trial_seed(3, 1));
    const ChannelSet b = trial_channels(c, 2.0, trial_seed(3, 1));
    CHECK((a.h_true[0] - b.h_true[0]).norm() == 0.0);
    CHECK(a.n_samples() == c.s_samples);
}

TEST_CASE("FRR rows and SDMA with perfect CSIT")
{
    ScenarioConfig c = small_config();
    c.sigma_e = {0.0};
    c.modes = {Mode::frr, Mode::sdma};
    const ResultTable t = sweep(c);
    for (const auto &r : t.rows)
    {
        if (r.mode == Mode::frr)
            CHECK(r.iterations == 0);
        else
            CHECK(r.min_se > 0.0);
    }
}

TEST_CASE("CSV output and round trip")
{
    ScenarioConfig c = small_config();
    c.sigma_e = {0.0, 1.0};
    c.n_trials = 2;
    const ResultTable t = sweep(c);
    const std::string csv = to_csv(t);
    CHECK(csv.rfind(std::string(csv_schema) + ",se_1,se_2\n", 0) == 0);
    CHECK(std::string(csv_schema) == "sweep_axis,sweep_value,mode,trial,min_se,q,iterations,runtime_ms");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(t.rows.size()));

    std::istringstream in(csv);
    const ResultTable back = parse_csv(in);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
    {
        CHECK(back.rows[i].mode == t.rows[i].mode);
        CHECK(back.rows[i].trial == t.rows[i].trial);
        CHECK(back.rows[i].min_se == doctest::Approx(t.rows[i].min_se).epsilon(1e-8));
        CHECK(back.rows[i].se.size() == t.rows[i].se.size());
    }

    std::ostringstream out;
    CHECK_THROWS_AS(emit_csv(out, ResultTable{}), InputError);
}

TEST_CASE("aggregation")
{
    ResultTable t;
    for (int i = 0; i < 4; ++i)
    {
        ResultRow r;
        r.sweep_axis = "sigma_e";
        r.sweep_value = 1.0;
        r.mode = Mode::rsma;
        r.trial = i;
        r.min_se = 1.0 + i;
        r.se = {r.min_se};
        t.rows.push_back(r);
    }
    t.rows.push_back(t.rows.front());
    t.rows.back().mode = Mode::sdma;
    const auto agg = aggregate(t);
    REQUIRE(agg.size() == 2);
    CHECK(agg[0].n == 4);
    CHECK(agg[0].mean == doctest::Approx(2.5));
    CHECK(agg[0].std == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(agg[0].min == 1.0);
    CHECK(agg[0].max == 4.0);
    CHECK(agg[1].n == 1);
    CHECK(agg[1].std == 0.0);
    CHECK(mean_min_se(t, 1.0, Mode::rsma) == doctest::Approx(2.5));
    CHECK_THROWS(mean_min_se(t, 2.0, Mode::rsma));

    const ResultTable half = per_slot(t);
    CHECK(half.rows[0].min_se == doctest::Approx(0.5));
    CHECK(half.rows[3].se[0] == doctest::Approx(2.0));

    std::ostringstream out;
    emit_aggregate_csv(out, agg);
    CHECK(out.str().find("RSMA") != std::string::npos);
}

TEST_CASE("manifest and JSON rows")
{
    ScenarioConfig c = small_config();
    c.sigma_e = {0.0};
    c.n_trials = 1;
    const ResultTable t = sweep(c);
    const auto m = nlohmann::json::parse(run_manifest(c, t));
    CHECK(m.contains("config"));
    CHECK(m.contains("version"));
    const auto rows = nlohmann::json::parse(to_json(t));
    CHECK(rows.size() == t.rows.size());
}

TEST_CASE("ST mean min-SE does not increase with the CSIT error")
{
    ScenarioConfig c = small_config();
    c.k_users = 4;
    c.sigma_e = {0.0, 1.0, 2.0};
    c.n_trials = 50;
    c.s_samples = 50;
    c.heldout_samples = 100;
    c.modes = {Mode::st_rsma};
    c.master_seed = 11;
    const ResultTable t = sweep(c);
    const double m0 = mean_min_se(t, 0.0, Mode::st_rsma);
    const double m1 = mean_min_se(t, 1.0, Mode::st_rsma);
    const double m2 = mean_min_se(t, 2.0, Mode::st_rsma);
    CHECK(m1 <= m0);
    CHECK(m2 <= m1);
}
