// SPDX-License-Identifier: Apache-2.0
//
// afdm-sbl: joint phase-noise and off-grid channel estimation for AFDM links
// Copyright (C) 2026 The afdm-sbl authors
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

// detection.hpp - effective DAF-domain channel from an estimate, linear
// MMSE equalization and bit-error counting.

#pragma once

#include "afdm/estimator.hpp"
#include "afdm/modem.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace afdm
{

struct EffectiveChannel
{
    CMat H;
    double noise_var = 0.0;
};

// H = A_af P(phi_hat) (sum_p h_p V^{k_p} Pi^{l_p}) A_af^H, assembled column by
// column through idaft/daft. phi_hat may be empty (no PN).
EffectiveChannel build_effective_channel(const ChannelEstimate &est, const AfdmConfig &cfg);

// Wraps a ground-truth path set and phase trajectory as a ChannelEstimate.
ChannelEstimate ground_truth_estimate(const PathSet &paths, const RVec &phase, double noise_var);

// x = H^H (H H^H + noise_var I)^{-1} y.  H may be N x K with K <= N.
CVec mmse_equalize(const CVec &y, const CMat &H, double noise_var);

struct ErrorCount
{
    std::size_t errors = 0;
    std::size_t total = 0;

    double rate() const { return total ? static_cast<double>(errors) / static_cast<double>(total) : 0.0; }
};

ErrorCount count_errors(std::span<const std::uint8_t> bits_hat, std::span<const std::uint8_t> bits_true);

} // namespace afdm
