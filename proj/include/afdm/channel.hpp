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

// channel.hpp - doubly-dispersive channel, virtual delay-Doppler grid and
// steering dictionaries.
//
// Doppler is carried in subcarrier units k (nu = k * delta_f), so the
// Doppler operator is V^k = diag(exp(j2pi k n / N)). Delays are integer
// samples and act as forward cyclic shifts once the prefix is removed.

#pragma once

#include "afdm/modem.hpp"
#include "afdm/types.hpp"

#include <span>
#include <vector>

namespace afdm
{

struct Path
{
    Complex gain{};
    int delay = 0;      // samples
    double doppler = 0; // subcarrier units
};

struct PathSet
{
    std::vector<Path> paths;

    std::size_t size() const { return paths.size(); }
    bool empty() const { return paths.empty(); }

    // Throws InputError unless 0 <= delay <= l_max (pairwise distinct) and |doppler| <= k_max.
    void validate(int l_max, double k_max) const;
};

struct GridSpec
{
    int l_max = 12;
    int k_max = 3;
    int r_tau = 1;     // delay resolution, integer samples
    double r_nu = 1.0; // Doppler resolution, subcarrier units

    int M_tau() const;
    int M_nu() const;
    int size() const { return M_tau() * M_nu(); }

    // l_max / r_tau and (2 k_max + 2) / r_nu must both be integers.
    void validate() const;
};

// Virtual sampling grid. Point m sits at delay floor(m / M_nu) * r_tau and
// Doppler (m mod M_nu) * r_nu - k_max - 1 + offset(m); offsets stay inside
// [-r_nu/2, r_nu/2].
class Grid
{
  public:
    explicit Grid(const GridSpec &spec);

    const GridSpec &spec() const { return spec_; }
    int size() const { return static_cast<int>(delay_.size()); }
    int M_tau() const { return M_tau_; }
    int M_nu() const { return M_nu_; }

    int delay(int m) const { return delay_[m]; }
    double base_doppler(int m) const { return base_[m]; }
    double offset(int m) const { return offset_[m]; }
    double doppler(int m) const { return base_[m] + offset_[m]; }

    // Stores xi clipped to the half-resolution interval; returns true when
    // the clip was active.
    bool set_offset(int m, double xi);
    void reset_offsets();

    // Grid index whose base point is closest to (delay, doppler); -1 if the
    // delay is not on the delay grid.
    int nearest_index(int delay, double doppler) const;

  private:
    GridSpec spec_;
    int M_tau_ = 0;
    int M_nu_ = 0;
    std::vector<int> delay_;
    std::vector<double> base_;
    std::vector<double> offset_;
};

// Jakes Doppler k = k_max cos(theta), delays uniform without replacement on
// {0..l_max}, gains CN(0, 1/P). With on_grid the Doppler is rounded to the
// nearest grid Doppler for resolution r_nu.
PathSet sample_paths(Rng &rng, int P, int l_max, int k_max, bool on_grid, double r_nu = 1.0);

// Linear propagation over a prefixed frame (length N + n_cpp, time index
// starting at -n_cpp). After remove_cpp the result equals
// sum_p h_p V^{k_p} Pi^{l_p} s_core.
CVec apply_channel(const CVec &s_cpp, const PathSet &paths, const AfdmConfig &cfg);

// Dense sum_p h_p V^{k_p} Pi^{l_p} (N x N), cyclic model.
CMat channel_matrix(const PathSet &paths, int N);

// phi(l, k) = V^k Pi^l s.
CVec steering_vector(int delay, double doppler, const CVec &pilot);
// d phi / d k: entry n is (j 2pi n / N) phi_n.
CVec steering_derivative(int delay, double doppler, const CVec &pilot);

// Time origin of the estimation dictionary.
//   Centred: Phi[:, m] = exp(-j2pi k n0 / N) phi(l, k),  n0 = (N - 1) / 2
//   Origin:  Phi[:, m] = phi(l, k)
// Omega holds d/dk of the columns, (j2pi (n - n_ref) / N) Phi[n, m].
// A coefficient mu on column m corresponds to the path gain
// mu * dictionary_phase(k, N, ref).
enum class DictionaryReference
{
    Centred,
    Origin,
};

Complex dictionary_phase(double doppler, int N, DictionaryReference ref = DictionaryReference::Centred);
CMat build_dictionary(const Grid &grid, const CVec &pilot, DictionaryReference ref = DictionaryReference::Centred);
CMat build_derivative(const Grid &grid, const CVec &pilot, DictionaryReference ref = DictionaryReference::Centred);

// Recompute only the listed columns of Phi and Omega from the grid.
void refresh_columns(const Grid &grid, const CVec &pilot, std::span<const int> columns, CMat &Phi, CMat &Omega,
                     DictionaryReference ref = DictionaryReference::Centred);

// DAF-domain kernel H_pn (N x N) for the given paths and receive phase
// trajectory:
//
//   H[mt, m] = 1/N sum_p h_p exp(j2pi(c1 l^2 - m l / N + c2 (m^2 - mt^2))) G_p(mt, m)
//   G_p(mt, m) = sum_n exp(j phi_n) exp(-j 2pi/N (mt - m + 2 N c1 l - k) n)
CMat daf_kernel(const PathSet &paths, const RVec &phase, const AfdmConfig &cfg);

} // namespace afdm
