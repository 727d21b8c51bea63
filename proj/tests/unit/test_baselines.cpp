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

#include "afdm/baselines.hpp"
#include "afdm/harness.hpp"
#include "helpers.hpp"

#include <algorithm>

using namespace afdm;
using afdm::test::random_cvec;

namespace
{

ExperimentConfig pilot_only(bool pn)
{
    ExperimentConfig cfg;
    cfg.data_symbols = false;
    cfg.pn.enabled = pn;
    cfg.estimators = {EstimatorSpec::parse("oracle_ls")};
    return cfg;
}

double gain_error(const PathSet &est, const PathSet &truth)
{
    double err = 0.0;
    for (const Path &p : truth.paths)
    {
        const auto it = std::find_if(est.paths.begin(), est.paths.end(), [&](const Path &q) {
            return q.delay == p.delay && std::abs(q.doppler - p.doppler) < 0.5;
        });
        err += it == est.paths.end() ? std::norm(p.gain) : std::norm(it->gain - p.gain);
    }
    return err;
}

} // namespace

TEST_CASE("oracle least squares is exact without noise", "[baselines]")
{
    const ExperimentConfig cfg = pilot_only(true);
    const Scenario sc = draw_scenario(cfg, 2);
    const ChannelEstimate est = oracle_ls(sc.clean, sc.paths, sc.phase, sc.frame.s_pilot, 0.0);
    REQUIRE(est.p_hat() == 3);
    CHECK(gain_error(est.paths, sc.paths) < 1e-20);
    CHECK((est.phi_hat - sc.phase).norm() == 0.0);
}

TEST_CASE("oracle least squares gain variance", "[baselines]")
{
    // Unbiased LS: E||h_hat - h||^2 = noise_var * tr((A^H A)^{-1}).
    const ExperimentConfig cfg = pilot_only(false);
    const Scenario sc = draw_scenario(cfg, 1);
    CMat A(64, 3);
    for (int p = 0; p < 3; ++p)
        A.col(p) = steering_vector(sc.paths.paths[p].delay, sc.paths.paths[p].doppler, sc.frame.s_pilot);
    const double nv = 0.5;
    const double expect = nv * (A.adjoint() * A).inverse().trace().real();
    Rng rng(99);
    double acc = 0.0;
    const int T = 4000;
    for (int t = 0; t < T; ++t)
    {
        const CVec r = sc.clean + random_cvec(rng, 64, std::sqrt(nv));
        acc += gain_error(oracle_ls(r, sc.paths, RVec(), sc.frame.s_pilot, nv).paths, sc.paths);
    }
    CHECK(acc / T == Catch::Approx(expect).epsilon(0.1));
}

TEST_CASE("pursuit recovers on-grid paths", "[baselines]")
{
    ExperimentConfig cfg = pilot_only(false);
    cfg.channel.on_grid = true;
    const Grid grid(cfg.grid);
    for (int t = 0; t < 5; ++t)
    {
        const Scenario sc = draw_scenario(cfg, t);
        double nv = 0.0;
        const CVec r = received_at(sc, 40.0, &nv);
        const ChannelEstimate est = omp_newton(r, sc.frame.s_pilot, grid, 6, nv);
        CHECK(est.p_hat() >= 3);
        CHECK(est.p_hat() <= 6);
        CHECK(gain_error(est.paths, sc.paths) < 1e-2);
    }
}

TEST_CASE("pursuit refines an off-grid Doppler", "[baselines]")
{
    const ExperimentConfig cfg = pilot_only(false);
    const Scenario sc = draw_scenario(cfg, 0);
    PathSet truth;
    truth.paths = {{Complex(0.9, 0.2), 7, -1.7}};
    const CVec clean = channel_matrix(truth, 64) * sc.frame.s_pilot;
    Rng rng(1);
    const double nv = clean.squaredNorm() / 64 * 1e-4;
    const CVec r = clean + random_cvec(rng, 64, std::sqrt(nv));
    const ChannelEstimate est = omp_newton(r, sc.frame.s_pilot, Grid(cfg.grid), 1, nv);
    REQUIRE(est.p_hat() == 1);
    CHECK(est.paths.paths[0].delay == 7);
    CHECK(std::abs(est.paths.paths[0].doppler + 1.7) < 0.02);

    OmpOptions none;
    none.newton_steps = 0;
    const ChannelEstimate raw = omp_newton(r, sc.frame.s_pilot, Grid(cfg.grid), 1, nv, none);
    CHECK(raw.paths.paths[0].doppler == -2.0);
    CHECK_THROWS_AS(omp_newton(r, sc.frame.s_pilot, Grid(cfg.grid), 0, nv), InputError);
}

TEST_CASE("two-pass pursuit with PN estimation", "[baselines]")
{
    const ExperimentConfig cfg = pilot_only(true);
    const RMat B = PnModel::build(64, cfg.pn.sigma2, cfg.pn.L).B;
    const Scenario sc = draw_scenario(cfg, 4);
    double nv = 0.0;
    const CVec r = received_at(sc, 30.0, &nv);
    const ChannelEstimate est = omp_newton_pn(r, sc.frame.s_pilot, Grid(cfg.grid), 6, nv, B);
    CHECK(est.eta.size() == 16);
    CHECK(est.phi_hat.size() == 64);
    CHECK(est.p_hat() >= 1);
}

TEST_CASE("fixed-grid SBL agrees with JPNCE-SBL on grid", "[baselines]")
{
    ExperimentConfig cfg = pilot_only(false);
    cfg.channel.on_grid = true;
    const Grid grid(cfg.grid);
    for (int t = 0; t < 3; ++t)
    {
        const Scenario sc = draw_scenario(cfg, t);
        const CVec r = received_at(sc, 40.0);
        const ChannelEstimate a = offgrid_sbl_fixed(r, sc.frame.s_pilot, grid, RMat(), cfg.sbl, false);
        const ChannelEstimate b = JpnceSbl(cfg.sbl, {false}).run(r, sc.frame.s_pilot, grid, RMat());
        CHECK(a.support == b.support);
        for (const Path &p : a.paths.paths)
            CHECK(std::abs(p.doppler - std::round(p.doppler)) < 0.05);
    }
}

TEST_CASE("fixed-grid SBL keeps a first-order Doppler error", "[baselines]")
{
    const ExperimentConfig cfg = pilot_only(false);
    const Scenario sc = draw_scenario(cfg, 0);
    PathSet truth;
    truth.paths = {{Complex(0.7, -0.4), 3, 0.3}};
    const CVec clean = channel_matrix(truth, 64) * sc.frame.s_pilot;
    Rng rng(6);
    const CVec r = clean + random_cvec(rng, 64, std::sqrt(clean.squaredNorm() / 64 * 1e-4));
    const ChannelEstimate est = offgrid_sbl_fixed(r, sc.frame.s_pilot, Grid(cfg.grid), RMat(), cfg.sbl, false);
    REQUIRE(est.p_hat() >= 1);
    const auto best = std::max_element(est.paths.paths.begin(), est.paths.paths.end(),
                                       [](const Path &a, const Path &b) { return std::abs(a.gain) < std::abs(b.gain); });
    CHECK(std::abs(best->doppler - 0.3) >= 0.1);
}

TEST_CASE("baseline names", "[baselines]")
{
    CHECK(to_string(BaselineKind::OmpNewton) == "omp_newton");
    CHECK(to_string(BaselineKind::OffgridSblFixed) == "offgrid_sbl");
    CHECK(to_string(BaselineKind::OracleLs) == "oracle_ls");
}
