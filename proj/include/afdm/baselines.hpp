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

// baselines.hpp - comparison estimators sharing the ChannelEstimate output.
//
//   OmpNewton        greedy pursuit, per-atom Newton refinement of the Doppler
//   OffgridSblFixed  SBL with a fixed grid and first-order Doppler correction
//   OracleLs         least squares on the true steering vectors
//
// PN-ignorant variants run the same code with P = I.

#pragma once

#include "afdm/channel.hpp"
#include "afdm/estimator.hpp"

#include <string_view>

namespace afdm
{

enum class BaselineKind
{
    OmpNewton,
    OffgridSblFixed,
    OracleLs,
};

struct OmpOptions
{
    int newton_steps = 3;         // 0 disables refinement
    int max_halvings = 8;         // backtracking per Newton step
    double curvature_step = 1e-3; // central-difference step [subcarriers]
};

// Stops after max_paths atoms or once ||residual||^2 < N * noise_floor.
ChannelEstimate omp_newton(const CVec &r, const CVec &pilot, const Grid &grid, int max_paths, double noise_floor,
                           const OmpOptions &opts = {});

// Two-pass variant: OMP, one PN update with the OMP channel held fixed,
// derotate, OMP again.
ChannelEstimate omp_newton_pn(const CVec &r, const CVec &pilot, const Grid &grid, int max_paths, double noise_floor,
                              const RMat &pn_basis, const OmpOptions &opts = {});

// JPNCE-SBL with grid evolution replaced by a fixed first-order model. With
// pn_compensation the PN stage runs inside the EM loop as usual.
ChannelEstimate offgrid_sbl_fixed(const CVec &r, const CVec &pilot, const Grid &grid, const RMat &pn_basis,
                                  const SblHyperParams &hp, bool pn_compensation);

// Least-squares gains on the true (delay, Doppler) pairs with the given phase
// trajectory applied; noise_var is passed through to the estimate.
ChannelEstimate oracle_ls(const CVec &r, const PathSet &truth, const RVec &phase, const CVec &pilot,
                          double noise_var);

std::string_view to_string(BaselineKind kind);

} // namespace afdm
