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

#include "afdm/detection.hpp"
#include "afdm/harness.hpp"
#include "helpers.hpp"

#include <vector>

using namespace afdm;
using afdm::test::random_cmat;
using afdm::test::random_cvec;
using afdm::test::rel_err;

TEST_CASE("effective channel of the true paths is the DAF kernel", "[detection]")
{
    Rng rng(3);
    const AfdmConfig cfg = AfdmConfig::with_doppler_guard(64, 3, 12);
    const PathSet paths = sample_paths(rng, 3, 12, 3, false);
    const RVec phi = sample_wiener(rng, 64, 1e-4);
    const EffectiveChannel eff = build_effective_channel(ground_truth_estimate(paths, phi, 0.1), cfg);
    CHECK(rel_err(eff.H, daf_kernel(paths, phi, cfg)) < 1e-10);
    CHECK(eff.noise_var == 0.1);

    const EffectiveChannel no_pn = build_effective_channel(ground_truth_estimate(paths, RVec(), 0.1), cfg);
    CHECK(rel_err(no_pn.H, daf_kernel(paths, RVec::Zero(64), cfg)) < 1e-10);
    CHECK(build_effective_channel(ChannelEstimate{}, cfg).H.isZero());
}

TEST_CASE("MMSE equalizer forms agree", "[detection]")
{
    Rng rng(8);
    for (int K : {16, 10})
    {
        const CMat H = random_cmat(rng, 16, K);
        const CVec y = random_cvec(rng, 16);
        const double nv = 0.3;
        CMat G = H.adjoint() * H;
        G.diagonal().array() += nv;
        CHECK(rel_err(mmse_equalize(y, H, nv), G.inverse() * H.adjoint() * y) < 1e-10);
    }
    const CMat H = random_cmat(rng, 8, 8);
    const CVec x = random_cvec(rng, 8);
    CHECK(rel_err(mmse_equalize(H * x, H, 1e-12), x) < 1e-6);
    CHECK_THROWS_AS(mmse_equalize(x, H, 0.0), InputError);
    CHECK_THROWS_AS(mmse_equalize(CVec::Zero(7), H, 1.0), DimensionError);
}

TEST_CASE("bit error counting", "[detection]")
{
    const std::vector<std::uint8_t> a{0, 1, 1, 0, 1}, b{0, 0, 1, 1, 1};
    const ErrorCount e = count_errors(a, b);
    CHECK(e.errors == 2);
    CHECK(e.total == 5);
    CHECK(e.rate() == Catch::Approx(0.4));
    CHECK(ErrorCount{}.rate() == 0.0);
    const std::vector<std::uint8_t> c{0};
    CHECK_THROWS_AS(count_errors(a, c), InputError);
}

TEST_CASE("perfect CSI without phase noise at high SNR", "[detection]")
{
    ExperimentConfig cfg;
    cfg.pn.enabled = false;
    cfg.estimators = {EstimatorSpec::parse("perfect_csi")};
    double errors = 0.0;
    const int T = 200;
    for (int t = 0; t < T; ++t)
        errors += run_trial(cfg, 40.0, t).front().ber;
    CHECK(errors / T < 1e-3);
}
