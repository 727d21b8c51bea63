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
#include "afdm/modem.hpp"
#include "afdm/phasenoise.hpp"
#include "helpers.hpp"

#include <set>
#include <vector>

using namespace afdm;
using afdm::test::random_cvec;
using afdm::test::rel_err;

namespace
{

PathSet three_paths()
{
    PathSet p;
    p.paths = {{Complex(0.8, -0.1), 0, 1.3}, {Complex(-0.2, 0.5), 4, -2.6}, {Complex(0.1, 0.3), 11, 0.0}};
    return p;
}

} // namespace

TEST_CASE("grid dimensions", "[channel]")
{
    GridSpec spec;
    CHECK(spec.M_tau() == 13);
    CHECK(spec.M_nu() == 9);
    CHECK(spec.size() == 117);
    spec.r_nu = 0.5;
    CHECK(spec.size() == 221);
    spec.r_nu = 0.25;
    CHECK(spec.size() == 429);
    spec.r_nu = 0.3;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = GridSpec{};
    spec.r_tau = 5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("grid layout and offsets", "[channel]")
{
    Grid g{GridSpec{}};
    CHECK(g.delay(0) == 0);
    CHECK(g.doppler(0) == -4.0);
    CHECK(g.doppler(8) == 4.0);
    CHECK(g.delay(9) == 1);
    CHECK(g.nearest_index(3, 1.2) == 3 * 9 + 5);
    CHECK(g.nearest_index(13, 0.0) == -1);

    CHECK_FALSE(g.set_offset(5, 0.25));
    CHECK(g.doppler(5) == 1.25);
    CHECK(g.set_offset(5, 0.7));
    CHECK(g.offset(5) == 0.5);
    CHECK(g.set_offset(5, -3.0));
    CHECK(g.offset(5) == -0.5);
    g.reset_offsets();
    CHECK(g.offset(5) == 0.0);
}

TEST_CASE("path sampling", "[channel]")
{
    Rng rng(21);
    for (int t = 0; t < 50; ++t)
    {
        const PathSet p = sample_paths(rng, 3, 12, 3, t % 2 == 0);
        REQUIRE(p.size() == 3);
        std::set<int> delays;
        for (const Path &q : p.paths)
        {
            delays.insert(q.delay);
            CHECK(q.delay >= 0);
            CHECK(q.delay <= 12);
            CHECK(std::abs(q.doppler) <= 3.0);
            if (t % 2 == 0)
                CHECK(q.doppler == std::round(q.doppler));
        }
        CHECK(delays.size() == 3);
        CHECK_NOTHROW(p.validate(12, 3));
    }
    CHECK_THROWS_AS(sample_paths(rng, 14, 12, 3, false), InputError);
}

TEST_CASE("path set validation", "[channel]")
{
    PathSet p = three_paths();
    CHECK_NOTHROW(p.validate(12, 3));
    p.paths[1].delay = 0;
    CHECK_THROWS_AS(p.validate(12, 3), InputError);
    p = three_paths();
    p.paths[0].doppler = 3.5;
    CHECK_THROWS_AS(p.validate(12, 3), InputError);
    p = three_paths();
    p.paths[2].delay = 13;
    CHECK_THROWS_AS(p.validate(12, 3), InputError);
}

TEST_CASE("prefixed propagation equals the cyclic model", "[channel]")
{
    Rng rng(2);
    const AfdmConfig cfg = AfdmConfig::with_doppler_guard(64, 3, 12);
    const PathSet paths = three_paths();
    const CVec s = random_cvec(rng, 64);
    const CVec sc = add_cpp(s, cfg);
    const CVec y = remove_cpp(apply_channel(sc, paths, cfg), cfg);

    CVec ref = CVec::Zero(64);
    for (int n = 0; n < 64; ++n)
        for (const Path &p : paths.paths)
            ref[n] += p.gain * std::polar(1.0, kTwoPi * p.doppler * n / 64) * sc[12 + n - p.delay];
    CHECK(rel_err(y, ref) < 1e-12);
    CHECK(rel_err(channel_matrix(paths, 64) * s, ref) < 1e-12);
}

TEST_CASE("delay beyond the prefix is a model error", "[channel]")
{
    const AfdmConfig cfg = AfdmConfig::with_doppler_guard(64, 3, 4);
    PathSet p;
    p.paths = {{Complex(1, 0), 6, 0.0}};
    CHECK_THROWS_AS(apply_channel(CVec::Zero(68), p, cfg), ModelError);
}

TEST_CASE("steering vectors and dictionary", "[channel]")
{
    Rng rng(8);
    const CVec s = random_cvec(rng, 64);
    CHECK((steering_vector(0, 0.0, s) - s).norm() == 0.0);

    Grid grid{GridSpec{}};
    grid.set_offset(40, 0.3);
    const CMat Phi = build_dictionary(grid, s);
    REQUIRE(Phi.cols() == 117);
    for (int m = 0; m < grid.size(); ++m)
    {
        CHECK(std::abs(Phi.col(m).norm() - s.norm()) < 1e-10);
        const CVec phys = steering_vector(grid.delay(m), grid.doppler(m), s);
        CHECK(rel_err(Phi.col(m), dictionary_phase(grid.doppler(m), 64) * phys) < 1e-12);
    }

    const CMat PhiO = build_dictionary(grid, s, DictionaryReference::Origin);
    CHECK(rel_err(PhiO.col(40), steering_vector(grid.delay(40), grid.doppler(40), s)) < 1e-12);
    CHECK(dictionary_phase(1.7, 64, DictionaryReference::Origin) == Complex(1.0, 0.0));

    // Omega against a central difference of the dictionary column.
    const double h = 1e-6;
    for (auto ref : {DictionaryReference::Centred, DictionaryReference::Origin})
    {
        const CMat Om = build_derivative(grid, s, ref);
        for (int m : {0, 40, 116})
        {
            Grid gp = grid, gm = grid;
            gp.set_offset(m, grid.offset(m) + h);
            gm.set_offset(m, grid.offset(m) - h);
            const CVec fd = (build_dictionary(gp, s, ref).col(m) - build_dictionary(gm, s, ref).col(m)) / (2 * h);
            CHECK(rel_err(fd, Om.col(m)) < 1e-7);
        }
    }
    const CVec d_phys = steering_derivative(2, 0.4, s);
    const CVec fd_phys = (steering_vector(2, 0.4 + h, s) - steering_vector(2, 0.4 - h, s)) / (2 * h);
    CHECK(rel_err(fd_phys, d_phys) < 1e-7);
}

TEST_CASE("refresh_columns matches a full rebuild", "[channel]")
{
    Rng rng(9);
    const CVec s = random_cvec(rng, 64);
    Grid grid{GridSpec{}};
    CMat Phi = build_dictionary(grid, s);
    CMat Omega = build_derivative(grid, s);
    grid.set_offset(3, -0.2);
    grid.set_offset(77, 0.45);
    const std::vector<int> cols{3, 77};
    refresh_columns(grid, s, cols, Phi, Omega);
    CHECK(rel_err(Phi, build_dictionary(grid, s)) < 1e-14);
    CHECK(rel_err(Omega, build_derivative(grid, s)) < 1e-14);
}

TEST_CASE("DAF-domain kernel equals time-domain propagation", "[channel]")
{
    Rng rng(4);
    const AfdmConfig cfg = AfdmConfig::with_doppler_guard(64, 3, 12);
    const CMat A = daft_matrix(cfg);
    for (int t = 0; t < 5; ++t)
    {
        const PathSet paths = sample_paths(rng, 3, 12, 3, false);
        const RVec phi = sample_wiener(rng, 64, 1e-3);
        const CMat ref = A * phase_rotation(phi).asDiagonal() * channel_matrix(paths, 64) * A.adjoint();
        CHECK(rel_err(daf_kernel(paths, phi, cfg), ref) < 1e-10);
    }
    CHECK_THROWS_AS(daf_kernel(three_paths(), RVec::Zero(10), cfg), DimensionError);
}
