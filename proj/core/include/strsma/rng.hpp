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

#ifndef strsma_rng_H
#define strsma_rng_H

#include <cstdint>
#include <initializer_list>
#include <random>

#include "strsma/types.hpp"

namespace strsma
{

// Stream tags; each random quantity draws from its own keyed substream so that
// adding draws to one stage never shifts another.
enum class Stream : std::uint64_t
{
    placement = 1,
    phase = 2,
    csit_error = 3,
    saa = 4,
    heldout = 5,
    link = 6,
    trial = 7,
    test = 99
};

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of a seed and a list of keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t h = mix64(seed);
    for (auto k : keys)
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> keys = {})
{
    std::uint64_t h = derive_seed(seed, {static_cast<std::uint64_t>(stream)});
    for (auto k : keys)
        h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return std::mt19937_64(h);
}

/// Circularly-symmetric CN(0, 1) draw.
template <class Engine>
cdouble standard_cn(Engine &engine)
{
    std::normal_distribution<double> normal(0.0, 0.7071067811865476);
    double re = normal(engine);
    double im = normal(engine);
    return {re, im};
}

template <class Engine>
CVec standard_cn_vector(Engine &engine, Eigen::Index n)
{
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = standard_cn(engine);
    return v;
}

} // namespace strsma

#endif
