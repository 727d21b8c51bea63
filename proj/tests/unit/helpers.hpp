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

// helpers.hpp - shared fixtures for the unit tests.

#pragma once

#include "afdm/types.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

namespace afdm::test
{

inline CVec random_cvec(Rng &rng, Eigen::Index n, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale / std::sqrt(2.0));
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = Complex(g(rng), g(rng));
    return v;
}

inline CMat random_cmat(Rng &rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
    CMat A(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        A.col(c) = random_cvec(rng, rows, scale);
    return A;
}

inline double rel_err(const CMat &a, const CMat &b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

} // namespace afdm::test
