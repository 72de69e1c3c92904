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

#include "strsma/types.hpp"

namespace strsma
{

std::string_view to_string(Mode mode)
{
    switch (mode)
    {
    case Mode::st_rsma: return "ST_RSMA";
    case Mode::rsma: return "RSMA";
    case Mode::sdma: return "SDMA";
    case Mode::multicast: return "MULTICAST";
    case Mode::frr: return "FRR";
    }
    return "UNKNOWN";
}

Mode mode_from_string(std::string_view name)
{
    for (Mode m : {Mode::st_rsma, Mode::rsma, Mode::sdma, Mode::multicast, Mode::frr})
        if (to_string(m) == name)
            return m;
    throw InputError("unknown mode '" + std::string(name) + "'");
}

RMat FeedPair::embed(int n_t) const
{
    if (m < 0 || n <= m || n >= n_t)
        throw InputError("feed pair (" + std::to_string(m) + ", " + std::to_string(n) + ") invalid for " +
                         std::to_string(n_t) + " feeds");
    RMat pi = RMat::Zero(n_t, 2);
    pi(m, 0) = 1.0;
    pi(n, 1) = 1.0;
    return pi;
}

double PrecoderSolution::total_power() const
{
    double power = private_precoders.squaredNorm();
    if (mode == Mode::st_rsma)
        power += common_power;
    else if (common_beam.size() > 0)
        power += common_beam.squaredNorm();
    return power;
}

} // namespace strsma
