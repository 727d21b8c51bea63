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

#include "afdm/phasenoise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace afdm
{
namespace
{

struct Atom
{
    int grid_index;
    int delay;
    double doppler;
};

double correlation(const CVec &res, const CVec &pilot, int delay, double doppler)
{
    return std::norm(steering_vector(delay, doppler, pilot).dot(res));
}

// Maximizes |phi(k)^H res|^2 over k within the cell of the base point.
double newton_refine(const CVec &res, const CVec &pilot, int delay, double base, double half_width,
                     const OmpOptions &opts)
{
    double k = base;
    double f = correlation(res, pilot, delay, k);
    const double h = opts.curvature_step;
    for (int step = 0; step < opts.newton_steps; ++step)
    {
        const CVec phi = steering_vector(delay, k, pilot);
        const CVec omega = steering_derivative(delay, k, pilot);
        const double grad = 2.0 * (std::conj(phi.dot(res)) * omega.dot(res)).real();
        const double curv =
            (correlation(res, pilot, delay, k + h) - 2.0 * f + correlation(res, pilot, delay, k - h)) / (h * h);
        if (!(curv < 0.0))
            break;
        double delta = -grad / curv;
        bool improved = false;
        for (int halving = 0; halving <= opts.max_halvings; ++halving, delta *= 0.5)
        {
            const double cand = std::clamp(k + delta, base - half_width, base + half_width);
            const double fc = correlation(res, pilot, delay, cand);
            if (fc > f)
            {
                k = cand;
                f = fc;
                improved = true;
                break;
            }
        }
        if (!improved)
            break;
    }
    return k;
}

CVec least_squares(const CMat &A, const CVec &r, bool &pinv_used)
{
    Eigen::ColPivHouseholderQR<CMat> qr(A);
    if (qr.rank() < A.cols())
    {
        pinv_used = true;
        return A.completeOrthogonalDecomposition().solve(r);
    }
    return qr.solve(r);
}

} // namespace

ChannelEstimate omp_newton(const CVec &r, const CVec &pilot, const Grid &grid, int max_paths, double noise_floor,
                           const OmpOptions &opts)
{
    if (max_paths < 1)
        throw InputError("omp_newton: max_paths must be >= 1");
    if (pilot.size() != r.size())
        throw DimensionError("omp_newton: pilot and observation lengths differ");

    const Eigen::Index N = r.size();
    const CMat Phi = build_dictionary(grid, pilot);
    const double half = 0.5 * grid.spec().r_nu;

    ChannelEstimate est;
    std::vector<Atom> atoms;
    std::vector<char> used(grid.size(), 0);
    CVec res = r;
    CVec gains;
    CMat A(N, 0);

    for (int it = 0; it < max_paths; ++it)
    {
        const RVec corr = (Phi.adjoint() * res).cwiseAbs2();
        int best = -1;
        for (int m = 0; m < grid.size(); ++m)
            if (!used[m] && (best < 0 || corr[m] > corr[best]))
                best = m;
        if (best < 0)
            break;
        used[best] = 1;

        const double k = newton_refine(res, pilot, grid.delay(best), grid.base_doppler(best), half, opts);
        atoms.push_back(Atom{best, grid.delay(best), k});
        A.conservativeResize(N, A.cols() + 1);
        A.col(A.cols() - 1) = steering_vector(grid.delay(best), k, pilot);

        bool pinv = false;
        gains = least_squares(A, r, pinv);
        est.diag.pseudo_inverse_count += pinv;
        res = r - A * gains;
        est.diag.iterations = it + 1;
        est.diag.residual_norms.push_back(res.norm());
        if (res.squaredNorm() < static_cast<double>(N) * noise_floor)
            break;
    }

    for (std::size_t a = 0; a < atoms.size(); ++a)
    {
        est.paths.paths.push_back(Path{gains[static_cast<Eigen::Index>(a)], atoms[a].delay, atoms[a].doppler});
        est.support.push_back(atoms[a].grid_index);
    }
    est.phi_hat = RVec::Zero(N);
    est.noise_var = std::max(res.squaredNorm() / static_cast<double>(N), 1e-300);
    est.diag.converged = true;
    return est;
}

ChannelEstimate omp_newton_pn(const CVec &r, const CVec &pilot, const Grid &grid, int max_paths, double noise_floor,
                              const RMat &pn_basis, const OmpOptions &opts)
{
    const ChannelEstimate first = omp_newton(r, pilot, grid, max_paths, noise_floor, opts);
    if (pn_basis.size() == 0 || first.paths.empty())
        return first;

    CMat A(r.size(), static_cast<Eigen::Index>(first.paths.size()));
    CVec g(A.cols());
    for (Eigen::Index a = 0; a < A.cols(); ++a)
    {
        const Path &p = first.paths.paths[a];
        A.col(a) = steering_vector(p.delay, p.doppler, pilot);
        g[a] = p.gain;
    }
    const double nv = std::max(noise_floor, first.noise_var);
    const RVec eta = update_pn_coeffs_white(r, A, g, pn_basis, nv);
    const RVec phi = pn_basis * eta;
    const CVec derotated = phase_rotation(-phi).cwiseProduct(r);

    ChannelEstimate second = omp_newton(derotated, pilot, grid, max_paths, noise_floor, opts);
    second.eta = eta;
    second.phi_hat = phi;
    second.diag.iterations += first.diag.iterations;
    second.diag.pseudo_inverse_count += first.diag.pseudo_inverse_count;
    return second;
}

ChannelEstimate offgrid_sbl_fixed(const CVec &r, const CVec &pilot, const Grid &grid, const RMat &pn_basis,
                                  const SblHyperParams &hp, bool pn_compensation)
{
    const JpnceSbl sbl(hp, EstimatorOptions{pn_compensation, GridMode::FixedFirstOrder, DictionaryReference::Origin});
    return sbl.run(r, pilot, grid, pn_basis);
}

ChannelEstimate oracle_ls(const CVec &r, const PathSet &truth, const RVec &phase, const CVec &pilot,
                          double noise_var)
{
    const Eigen::Index N = r.size();
    if (pilot.size() != N || (phase.size() != 0 && phase.size() != N))
        throw DimensionError("oracle_ls: dimension mismatch");

    const CVec pn = phase.size() == N ? phase_rotation(phase) : CVec::Ones(N);
    CMat A(N, static_cast<Eigen::Index>(truth.size()));
    for (Eigen::Index p = 0; p < A.cols(); ++p)
    {
        const Path &path = truth.paths[p];
        A.col(p) = pn.cwiseProduct(steering_vector(path.delay, path.doppler, pilot));
    }

    ChannelEstimate est;
    bool pinv = false;
    const CVec gains = A.cols() > 0 ? least_squares(A, r, pinv) : CVec();
    est.diag.pseudo_inverse_count += pinv;
    for (Eigen::Index p = 0; p < A.cols(); ++p)
    {
        Path path = truth.paths[p];
        path.gain = gains[p];
        est.paths.paths.push_back(path);
    }
    est.phi_hat = phase.size() == N ? phase : RVec::Zero(N);
    est.noise_var = noise_var;
    est.diag.converged = true;
    return est;
}

std::string_view to_string(BaselineKind kind)
{
    switch (kind)
    {
    case BaselineKind::OmpNewton:
        return "omp_newton";
    case BaselineKind::OffgridSblFixed:
        return "offgrid_sbl";
    case BaselineKind::OracleLs:
        return "oracle_ls";
    }
    return "unknown";
}

} // namespace afdm
