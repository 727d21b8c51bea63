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

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace afdm
{

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// mt19937_64 output is fixed by the standard, so seeded streams are portable.
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Vector/matrix sizes disagree with the configuration.
class DimensionError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// A configuration value violates an invariant.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Caller-supplied data is malformed (odd bit count, too many paths, ...).
class InputError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// The physical model assumption is broken (e.g. delay longer than the prefix).
class ModelError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite iterate or failed factorization.
class NumericError : public std::runtime_error
{
  public:
    NumericError(const std::string &what, int iteration = -1)
        : std::runtime_error(what), iteration_(iteration)
    {
    }
    int iteration() const noexcept { return iteration_; }

  private:
    int iteration_;
};

} // namespace afdm
