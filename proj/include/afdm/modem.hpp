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

// modem.hpp - AFDM baseband modem
//
// The discrete affine Fourier transform is a unitary DFT sandwiched between
// two quadratic-phase diagonals:
//
//   A_af = L(c2) * F * L(c1),   L(c) = diag(exp(-j2pi c n^2))
//
// idaft() maps DAF-domain symbols to time samples, daft() is its adjoint.
// Both run as chirp multiply + FFT; daft_matrix() builds the dense O(N^2)
// operator for cross-checking.

#pragma once

#include "afdm/types.hpp"

#include <span>
#include <vector>

namespace afdm
{

struct AfdmConfig
{
    int N = 64;             // subcarriers
    double delta_f = 15e3;  // subcarrier spacing [Hz]
    double c1 = 9.0 / 128;  // time chirp; 2*N*c1 odd for full diversity
    double c2 = 0.0;        // frequency chirp
    int n_cpp = 12;         // chirp-periodic prefix length [samples]

    double sample_period() const { return 1.0 / (N * delta_f); }
    double bandwidth() const { return N * delta_f; }

    // Throws ConfigError unless N >= 2, 0 <= n_cpp < N and the chirp is
    // periodic over the frame (c1*N^2 and 2*N*c1 both integers). The last
    // condition is what makes the prefix turn delays into cyclic shifts.
    void validate() const;

    // c1 = (2(k_max+1)+1)/(2N), c2 = 0.
    static AfdmConfig with_doppler_guard(int N, int k_max, int n_cpp, double delta_f = 15e3);
};

double default_c1(int N, int k_max);

CVec idaft(const CVec &x, const AfdmConfig &cfg);
CVec daft(const CVec &r, const AfdmConfig &cfg);

// Dense A_af. Row m, column n: exp(-j2pi(c1 n^2 + c2 m^2 + mn/N)) / sqrt(N).
CMat daft_matrix(const AfdmConfig &cfg);

// Prepend n_cpp samples s[N+n] * exp(-j2pi c1 (N^2 + 2Nn)), n = -n_cpp..-1.
CVec add_cpp(const CVec &s, const AfdmConfig &cfg);
CVec remove_cpp(const CVec &s, const AfdmConfig &cfg);

// Gray-mapped 4-QAM, unit average energy:
//   b0 b1 -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)
inline constexpr int kBitsPerSymbol = 2;
CVec qam_map(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> qam_demap(const CVec &symbols);

} // namespace afdm
