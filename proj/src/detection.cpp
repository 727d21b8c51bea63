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

#include "afdm/channel.hpp"
#include "afdm/phasenoise.hpp"

#include <cmath>

namespace afdm
{

EffectiveChannel build_effective_channel(const ChannelEstimate &est, const AfdmConfig &cfg)
{
    const int N = cfg.N;
    const bool with_pn = est.phi_hat.size() == N;
    const CVec pn = with_pn ? phase_rotation(est.phi_hat) : CVec::Ones(N);

    EffectiveChannel eff;
    eff.noise_var = est.noise_var;
    eff.H = CMat::Zero(N, N);
    if (est.paths.empty())
        return eff;

    CVec e = CVec::Zero(N);
    for (int m = 0; m < N; ++m)
    {
        e.setZero();
        e[m] = 1.0;
        const CVec s = idaft(e, cfg);
        CVec t = CVec::Zero(N);
        for (const Path &p : est.paths.paths)
            t += p.gain * steering_vector(p.delay, p.doppler, s);
        eff.H.col(m) = daft(pn.cwiseProduct(t), cfg);
    }
    return eff;
}

ChannelEstimate ground_truth_estimate(const PathSet &paths, const RVec &phase, double noise_var)
{
    ChannelEstimate est;
    est.paths = paths;
    est.phi_hat = phase;
    est.noise_var = noise_var;
    est.diag.converged = true;
    return est;
}

CVec mmse_equalize(const CVec &y, const CMat &H, double noise_var)
{
    if (!(noise_var > 0.0))
        throw InputError("mmse_equalize: noise_var must be positive");
    if (H.rows() != y.size())
        throw DimensionError("mmse_equalize: H rows must match y");

    const Eigen::Index N = H.rows();
    CMat G = H * H.adjoint();
    G.diagonal().array() += noise_var;
    Eigen::LLT<CMat> llt(G);
    if (llt.info() != Eigen::Success)
    {
        G.diagonal().array() += 1e-12 * std::max(G.real().trace() / static_cast<double>(N), 1.0);
        llt.compute(G);
        if (llt.info() != Eigen::Success)
            throw NumericError("mmse_equalize: regularized solve failed");
    }
    return H.adjoint() * llt.solve(y);
}

ErrorCount count_errors(std::span<const std::uint8_t> bits_hat, std::span<const std::uint8_t> bits_true)
{
    if (bits_hat.size() != bits_true.size())
        throw InputError("count_errors: length mismatch");
    ErrorCount out;
    out.total = bits_true.size();
    for (std::size_t i = 0; i < bits_true.size(); ++i)
        out.errors += (bits_hat[i] != bits_true[i]);
    return out;
}

} // namespace afdm
