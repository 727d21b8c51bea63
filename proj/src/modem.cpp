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

#include "afdm/modem.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>

namespace afdm
{
namespace
{

bool near_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

// exp(j 2pi c n^2) with the phase reduced modulo one turn before scaling.
Complex chirp(double c, long long n)
{
    const double turns = std::fmod(c * static_cast<double>(n * n), 1.0);
    return std::polar(1.0, kTwoPi * turns);
}

Eigen::FFT<double> &fft_engine()
{
    thread_local Eigen::FFT<double> engine = [] {
        Eigen::FFT<double> e;
        e.SetFlag(Eigen::FFT<double>::Unscaled);
        return e;
    }();
    return engine;
}

void require_length(const CVec &v, int expected, const char *what)
{
    if (v.size() != expected)
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                             std::to_string(v.size()));
}

} // namespace

void AfdmConfig::validate() const
{
    if (N < 2)
        throw ConfigError("AfdmConfig: N must be >= 2");
    if (!(delta_f > 0.0))
        throw ConfigError("AfdmConfig: delta_f must be positive");
    if (n_cpp < 0 || n_cpp >= N)
        throw ConfigError("AfdmConfig: n_cpp must lie in [0, N)");
    if (!near_integer(2.0 * N * c1) || !near_integer(c1 * N * N))
        throw ConfigError("AfdmConfig: c1 must make the chirp N-periodic (2*N*c1 and c1*N^2 integers)");
}

AfdmConfig AfdmConfig::with_doppler_guard(int N, int k_max, int n_cpp, double delta_f)
{
    AfdmConfig cfg;
    cfg.N = N;
    cfg.delta_f = delta_f;
    cfg.c1 = default_c1(N, k_max);
    cfg.c2 = 0.0;
    cfg.n_cpp = n_cpp;
    return cfg;
}

double default_c1(int N, int k_max) { return (2.0 * (k_max + 1) + 1.0) / (2.0 * N); }

CVec idaft(const CVec &x, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    require_length(x, N, "idaft");

    std::vector<Complex> buf(N), out;
    for (int m = 0; m < N; ++m)
        buf[m] = x[m] * chirp(cfg.c2, m);
    fft_engine().inv(out, buf);

    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    CVec s(N);
    for (int n = 0; n < N; ++n)
        s[n] = out[n] * scale * chirp(cfg.c1, n);
    return s;
}

CVec daft(const CVec &r, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    if (r.size() == N + cfg.n_cpp && cfg.n_cpp > 0)
        throw DimensionError("daft: input still carries the chirp-periodic prefix");
    require_length(r, N, "daft");

    std::vector<Complex> buf(N), out;
    for (int n = 0; n < N; ++n)
        buf[n] = r[n] * chirp(-cfg.c1, n);
    fft_engine().fwd(out, buf);

    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    CVec y(N);
    for (int m = 0; m < N; ++m)
        y[m] = out[m] * scale * chirp(-cfg.c2, m);
    return y;
}

CMat daft_matrix(const AfdmConfig &cfg)
{
    const int N = cfg.N;
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    CMat A(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
        {
            const double dft_turns = static_cast<double>((static_cast<long long>(m) * n) % N) / N;
            A(m, n) = scale * chirp(-cfg.c1, n) * chirp(-cfg.c2, m) * std::polar(1.0, -kTwoPi * dft_turns);
        }
    return A;
}

CVec add_cpp(const CVec &s, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    if (cfg.n_cpp >= N || cfg.n_cpp < 0)
        throw ConfigError("add_cpp: n_cpp must lie in [0, N)");
    require_length(s, N, "add_cpp");

    CVec out(N + cfg.n_cpp);
    for (int i = 0; i < cfg.n_cpp; ++i)
    {
        const long long n = i - cfg.n_cpp; // -n_cpp .. -1
        const double turns = std::fmod(cfg.c1 * (static_cast<double>(N) * N + 2.0 * N * n), 1.0);
        out[i] = s[N + n] * std::polar(1.0, -kTwoPi * turns);
    }
    out.tail(N) = s;
    return out;
}

CVec remove_cpp(const CVec &s, const AfdmConfig &cfg)
{
    require_length(s, cfg.N + cfg.n_cpp, "remove_cpp");
    return s.tail(cfg.N);
}

CVec qam_map(std::span<const std::uint8_t> bits)
{
    if (bits.size() % kBitsPerSymbol != 0)
        throw InputError("qam_map: bit count must be a multiple of 2");
    const double a = 1.0 / std::sqrt(2.0);
    CVec out(static_cast<Eigen::Index>(bits.size() / kBitsPerSymbol));
    for (Eigen::Index k = 0; k < out.size(); ++k)
    {
        const auto b0 = bits[2 * k], b1 = bits[2 * k + 1];
        if (b0 > 1 || b1 > 1)
            throw InputError("qam_map: bits must be 0 or 1");
        out[k] = Complex(a * (1 - 2 * b0), a * (1 - 2 * b1));
    }
    return out;
}

std::vector<std::uint8_t> qam_demap(const CVec &symbols)
{
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(symbols.size()) * kBitsPerSymbol);
    for (const Complex &z : symbols)
    {
        bits.push_back(z.real() < 0.0 ? 1 : 0);
        bits.push_back(z.imag() < 0.0 ? 1 : 0);
    }
    return bits;
}

} // namespace afdm
