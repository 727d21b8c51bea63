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

#include "afdm/channel.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace afdm
{
namespace
{

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

int wrap(int n, int N) { return ((n % N) + N) % N; }

} // namespace

void PathSet::validate(int l_max, double k_max) const
{
    std::vector<int> seen;
    for (const Path &p : paths)
    {
        if (p.delay < 0 || p.delay > l_max)
            throw InputError("PathSet: delay " + std::to_string(p.delay) + " outside [0, l_max]");
        if (std::abs(p.doppler) > k_max + 1e-12)
            throw InputError("PathSet: |doppler| exceeds k_max");
        if (std::find(seen.begin(), seen.end(), p.delay) != seen.end())
            throw InputError("PathSet: delays must be pairwise distinct");
        seen.push_back(p.delay);
    }
}

int GridSpec::M_tau() const { return static_cast<int>(std::lround(static_cast<double>(l_max) / r_tau)) + 1; }

int GridSpec::M_nu() const { return static_cast<int>(std::lround((2.0 * k_max + 2.0) / r_nu)) + 1; }

void GridSpec::validate() const
{
    if (l_max < 0 || k_max < 0)
        throw ConfigError("GridSpec: l_max and k_max must be non-negative");
    if (r_tau < 1)
        throw ConfigError("GridSpec: r_tau must be a positive integer");
    if (!(r_nu > 0.0))
        throw ConfigError("GridSpec: r_nu must be positive");
    if (l_max % r_tau != 0)
        throw ConfigError("GridSpec: l_max / r_tau must be an integer");
    if (!near_integer((2.0 * k_max + 2.0) / r_nu))
        throw ConfigError("GridSpec: (2 k_max + 2) / r_nu must be an integer");
}

Grid::Grid(const GridSpec &spec) : spec_(spec)
{
    spec_.validate();
    M_tau_ = spec_.M_tau();
    M_nu_ = spec_.M_nu();
    const int M = M_tau_ * M_nu_;
    delay_.resize(M);
    base_.resize(M);
    offset_.assign(M, 0.0);
    for (int m = 0; m < M; ++m)
    {
        delay_[m] = (m / M_nu_) * spec_.r_tau;
        base_[m] = (m % M_nu_) * spec_.r_nu - spec_.k_max - 1.0;
    }
}

bool Grid::set_offset(int m, double xi)
{
    const double half = 0.5 * spec_.r_nu;
    double clipped = std::clamp(xi, -half, half);
    offset_[m] = clipped;
    return clipped != xi;
}

void Grid::reset_offsets() { std::fill(offset_.begin(), offset_.end(), 0.0); }

int Grid::nearest_index(int delay, double doppler) const
{
    if (delay < 0 || delay % spec_.r_tau != 0 || delay / spec_.r_tau >= M_tau_)
        return -1;
    const double b = (doppler + spec_.k_max + 1.0) / spec_.r_nu;
    const int bi = std::clamp(static_cast<int>(std::lround(b)), 0, M_nu_ - 1);
    return (delay / spec_.r_tau) * M_nu_ + bi;
}

PathSet sample_paths(Rng &rng, int P, int l_max, int k_max, bool on_grid, double r_nu)
{
    if (P < 0 || P > l_max + 1)
        throw InputError("sample_paths: need P <= l_max + 1 distinct delays");

    std::vector<int> delays(l_max + 1);
    std::iota(delays.begin(), delays.end(), 0);
    // Partial Fisher-Yates: the first P entries become the drawn delays.
    for (int i = 0; i < P; ++i)
    {
        boost::random::uniform_int_distribution<int> pick(i, l_max);
        std::swap(delays[i], delays[pick(rng)]);
    }

    boost::random::uniform_real_distribution<double> angle(0.0, kTwoPi);
    boost::random::normal_distribution<double> normal(0.0, std::sqrt(0.5 / std::max(P, 1)));

    PathSet set;
    set.paths.reserve(P);
    for (int p = 0; p < P; ++p)
    {
        Path path;
        path.delay = delays[p];
        path.doppler = k_max * std::cos(angle(rng));
        if (on_grid)
        {
            const double b = std::round((path.doppler + k_max + 1.0) / r_nu);
            path.doppler = b * r_nu - k_max - 1.0;
        }
        const double re = normal(rng);
        const double im = normal(rng);
        path.gain = Complex(re, im);
        set.paths.push_back(path);
    }
    return set;
}

CVec apply_channel(const CVec &s_cpp, const PathSet &paths, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    const int len = N + cfg.n_cpp;
    if (s_cpp.size() != len)
        throw DimensionError("apply_channel: input must carry the prefix (length N + n_cpp)");

    CVec out = CVec::Zero(len);
    for (const Path &p : paths.paths)
    {
        if (p.delay < 0 || p.delay > cfg.n_cpp)
            throw ModelError("apply_channel: path delay " + std::to_string(p.delay) + " exceeds the prefix length");
        for (int i = p.delay; i < len; ++i)
        {
            const double n = i - cfg.n_cpp;
            out[i] += p.gain * std::polar(1.0, kTwoPi * p.doppler * n / N) * s_cpp[i - p.delay];
        }
    }
    return out;
}

CMat channel_matrix(const PathSet &paths, int N)
{
    CMat H = CMat::Zero(N, N);
    for (const Path &p : paths.paths)
        for (int n = 0; n < N; ++n)
            H(n, wrap(n - p.delay, N)) += p.gain * std::polar(1.0, kTwoPi * p.doppler * n / N);
    return H;
}

CVec steering_vector(int delay, double doppler, const CVec &pilot)
{
    const int N = static_cast<int>(pilot.size());
    CVec v(N);
    for (int n = 0; n < N; ++n)
        v[n] = std::polar(1.0, kTwoPi * doppler * n / N) * pilot[wrap(n - delay, N)];
    return v;
}

CVec steering_derivative(int delay, double doppler, const CVec &pilot)
{
    const int N = static_cast<int>(pilot.size());
    CVec v = steering_vector(delay, doppler, pilot);
    for (int n = 0; n < N; ++n)
        v[n] *= Complex(0.0, kTwoPi * n / N);
    return v;
}

namespace
{

double centre(int N, DictionaryReference ref) { return ref == DictionaryReference::Centred ? 0.5 * (N - 1) : 0.0; }

void fill_column(const Grid &grid, const CVec &pilot, int m, CMat &Phi, CMat *Omega, DictionaryReference ref)
{
    const int N = static_cast<int>(pilot.size());
    const double k = grid.doppler(m);
    const int l = grid.delay(m);
    const double n0 = centre(N, ref);
    for (int n = 0; n < N; ++n)
    {
        Phi(n, m) = std::polar(1.0, kTwoPi * k * (n - n0) / N) * pilot[wrap(n - l, N)];
        if (Omega)
            (*Omega)(n, m) = Complex(0.0, kTwoPi * (n - n0) / N) * Phi(n, m);
    }
}

} // namespace

Complex dictionary_phase(double doppler, int N, DictionaryReference ref)
{
    return std::polar(1.0, -kTwoPi * doppler * centre(N, ref) / N);
}

CMat build_dictionary(const Grid &grid, const CVec &pilot, DictionaryReference ref)
{
    CMat Phi(pilot.size(), grid.size());
    for (int m = 0; m < grid.size(); ++m)
        fill_column(grid, pilot, m, Phi, nullptr, ref);
    return Phi;
}

CMat build_derivative(const Grid &grid, const CVec &pilot, DictionaryReference ref)
{
    CMat Phi(pilot.size(), grid.size());
    CMat Omega(pilot.size(), grid.size());
    for (int m = 0; m < grid.size(); ++m)
        fill_column(grid, pilot, m, Phi, &Omega, ref);
    return Omega;
}

void refresh_columns(const Grid &grid, const CVec &pilot, std::span<const int> columns, CMat &Phi, CMat &Omega,
                     DictionaryReference ref)
{
    for (int m : columns)
        fill_column(grid, pilot, m, Phi, &Omega, ref);
}

CMat daf_kernel(const PathSet &paths, const RVec &phase, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    if (phase.size() != N)
        throw DimensionError("daf_kernel: phase trajectory must have length N");

    CVec pn(N);
    for (int n = 0; n < N; ++n)
        pn[n] = std::polar(1.0, phase[n]);

    CMat H = CMat::Zero(N, N);
    // G_p depends on (mt - m) only; tabulate it for q = mt - m in [-(N-1), N-1].
    std::vector<Complex> G(2 * N - 1);
    for (const Path &p : paths.paths)
    {
        const double shift = 2.0 * N * cfg.c1 * p.delay - p.doppler;
        for (int q = -(N - 1); q <= N - 1; ++q)
        {
            Complex acc = 0.0;
            for (int n = 0; n < N; ++n)
            {
                const double turns = std::fmod((q + shift) * n / N, 1.0);
                acc += pn[n] * std::polar(1.0, -kTwoPi * turns);
            }
            G[q + N - 1] = acc;
        }
        for (int mt = 0; mt < N; ++mt)
            for (int m = 0; m < N; ++m)
            {
                const double turns = std::fmod(cfg.c1 * p.delay * p.delay - static_cast<double>(m) * p.delay / N +
                                                   cfg.c2 * (static_cast<double>(m) * m - static_cast<double>(mt) * mt),
                                               1.0);
                H(mt, m) += p.gain * std::polar(1.0, kTwoPi * turns) * G[mt - m + N - 1] / static_cast<double>(N);
            }
    }
    return H;
}

} // namespace afdm
