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

#include <benchmark/benchmark.h>

#include "strsma/channel.hpp"
#include "strsma/qcqp.hpp"
#include "strsma/wmmse.hpp"

using namespace strsma;

namespace
{

ChannelSet scenario(int n_t, int k_users, int samples)
{
    SatelliteGeometry g;
    ChannelSet c = synth_channel(g, place_users(g, n_t, k_users, 1), n_t);
    c = impair_csit(std::move(c), 1.0, 2);
    return draw_saa_samples(std::move(c), samples, 3);
}

void bm_subproblem(benchmark::State &state)
{
    const int k = static_cast<int>(state.range(0));
    const ChannelSet c = scenario(k, k, 100);
    const PrecoderSolution s = initial_solution(c, Mode::st_rsma, 1.0);
    const auto terms = average_terms(c.samples, compute_weights(c.samples, s), s.pair);
    const qcqp::Problem p = build_subproblem(terms, 1.0, Mode::st_rsma, k);
    const auto start = qcqp::find_strictly_feasible(p);
    for (auto _ : state)
        benchmark::DoNotOptimize(qcqp::solve(p, *start));
}
BENCHMARK(bm_subproblem)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void bm_maxmin(benchmark::State &state)
{
    const int k = static_cast<int>(state.range(0));
    const Mode mode = state.range(1) ? Mode::rsma : Mode::st_rsma;
    const ChannelSet c = scenario(k, k, 100);
    MaxMinParams params;
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_maxmin(c, mode, params));
}
BENCHMARK(bm_maxmin)->Args({4, 0})->Args({4, 1})->Args({8, 0})->Unit(benchmark::kMillisecond);

void bm_weights(benchmark::State &state)
{
    const ChannelSet c = scenario(8, 8, 100);
    const PrecoderSolution s = initial_solution(c, Mode::st_rsma, 1.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(average_terms(c.samples, compute_weights(c.samples, s), s.pair));
}
BENCHMARK(bm_weights)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
