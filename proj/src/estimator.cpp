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

#include "afdm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace afdm
{
namespace
{

bool all_finite(const CVec &v) { return v.allFinite(); }

CMat scale_rows(const CVec &diag, const CMat &M) { return diag.asDiagonal() * M; }

} // namespace

void SblHyperParams::validate() const
{
    if (!(rho > 0.0))
        throw ConfigError("SblHyperParams: rho must be positive");
    if (!(c > 0.0) || !(d > 0.0))
        throw ConfigError("SblHyperParams: c and d must be positive");
    if (!(epsilon > 0.0))
        throw ConfigError("SblHyperParams: epsilon must be positive");
    if (n_iter < 1)
        throw ConfigError("SblHyperParams: n_iter must be >= 1");
    if (!(support_threshold > 0.0) || support_threshold >= 1.0)
        throw ConfigError("SblHyperParams: support_threshold must lie in (0, 1)");
    if (max_paths < 1)
        throw ConfigError("SblHyperParams: max_paths must be >= 1");
    if (!(gamma_min > 0.0))
        throw ConfigError("SblHyperParams: gamma_min must be positive");
}

// ---------------------------------------------------------------------------
// E-step
// ---------------------------------------------------------------------------

Posterior posterior_update(const CVec &r, const CMat &Psi, const RVec &gamma, double beta)
{
    const Eigen::Index N = Psi.rows();
    const Eigen::Index M = Psi.cols();
    if (r.size() != N || gamma.size() != M)
        throw DimensionError("posterior_update: r, Psi and gamma disagree in size");
    if (!(beta > 0.0) || !(gamma.array() > 0.0).all())
        throw InputError("posterior_update: gamma and beta must be positive");

    Posterior post;
    post.gamma_ = gamma;
    post.beta_ = beta;

    // C = beta^{-1} I + (Psi Gamma^{1/2})(Psi Gamma^{1/2})^H
    const CMat scaled = Psi * gamma.cwiseSqrt().cast<Complex>().asDiagonal();
    CMat C = CMat::Identity(N, N) / beta;
    C.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    C.triangularView<Eigen::StrictlyUpper>() = C.adjoint().triangularView<Eigen::StrictlyUpper>();

    post.chol_.compute(C);
    if (post.chol_.info() != Eigen::Success)
    {
        const double base = std::max(C.real().trace() / N, 1e-300);
        double jitter = 1e-12 * base;
        for (int attempt = 0; attempt < 8 && post.chol_.info() != Eigen::Success; ++attempt, jitter *= 100.0)
            post.chol_.compute(C + jitter * CMat::Identity(N, N));
        if (post.chol_.info() != Eigen::Success)
            throw NumericError("posterior_update: marginal covariance is not positive definite");
        post.jittered = true;
    }

    post.W_ = post.chol_.matrixL().solve(Psi);
    const CVec Lr = post.chol_.matrixL().solve(r);
    post.mu = (gamma.cast<Complex>().asDiagonal() * (post.W_.adjoint() * Lr)).eval();

    post.sigma_diag.resize(M);
    for (Eigen::Index m = 0; m < M; ++m)
    {
        const double g = gamma[m];
        post.sigma_diag[m] = std::max(g - g * g * post.W_.col(m).squaredNorm(), 0.0);
    }
    return post;
}

CVec Posterior::sigma_column(int m) const
{
    CVec col = -(gamma_.cast<Complex>().asDiagonal() * (W_.adjoint() * W_.col(m))) * gamma_[m];
    col[m] += gamma_[m];
    return col;
}

CMat Posterior::sigma_block(std::span<const int> idx) const
{
    const auto k = static_cast<Eigen::Index>(idx.size());
    CMat Wk(W_.rows(), k);
    for (Eigen::Index a = 0; a < k; ++a)
        Wk.col(a) = W_.col(idx[a]) * gamma_[idx[a]];
    CMat S = -(Wk.adjoint() * Wk);
    for (Eigen::Index a = 0; a < k; ++a)
        S(a, a) += gamma_[idx[a]];
    return S;
}

CMat Posterior::sigma_full() const
{
    const CMat GW = W_ * gamma_.cast<Complex>().asDiagonal();
    CMat S = -(GW.adjoint() * GW);
    S.diagonal() += gamma_.cast<Complex>();
    return S;
}

CMat Posterior::marginal_solve(const CMat &X) const { return chol_.solve(X); }

CVec Posterior::marginal_solve(const CVec &x) const { return chol_.solve(x); }

// ---------------------------------------------------------------------------
// Stage 1
// ---------------------------------------------------------------------------

std::vector<int> select_support(const RVec &gamma, double threshold, int cap)
{
    std::vector<int> idx;
    if (gamma.size() == 0)
        return idx;
    const double floor = threshold * gamma.maxCoeff();
    for (Eigen::Index m = 0; m < gamma.size(); ++m)
        if (gamma[m] > floor)
            idx.push_back(static_cast<int>(m));
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return gamma[a] > gamma[b]; });
    if (cap > 0 && static_cast<int>(idx.size()) > cap)
        idx.resize(cap);
    return idx;
}

HyperUpdate update_hyperparams(const CVec &r, const CMat &Psi, const Posterior &post, const SblHyperParams &hp)
{
    const double N = static_cast<double>(r.size());
    const RVec &gamma = post.gamma();
    const double beta = post.beta();

    HyperUpdate out;
    out.residual_norm = (r - Psi * post.mu).norm();

    double trace_term = 0.0;
    for (Eigen::Index m = 0; m < gamma.size(); ++m)
        trace_term += 1.0 - post.sigma_diag[m] / gamma[m];
    double c_beta = out.residual_norm * out.residual_norm + trace_term / beta;
    if (c_beta < 0.0)
    {
        c_beta = 0.0;
        out.clamped = true;
    }
    out.beta = (N + hp.c - 1.0) / (hp.d + c_beta);

    out.gamma.resize(gamma.size());
    for (Eigen::Index m = 0; m < gamma.size(); ++m)
    {
        const double xi = post.sigma_diag[m] + std::norm(post.mu[m]);
        double g = 0.0;
        if (hp.gamma_rule == GammaRule::Stabilized)
            g = (std::sqrt(1.0 + 4.0 * hp.rho * xi) - 1.0) / (2.0 * hp.rho);
        else
            g = (std::sqrt(4.0 * hp.rho * (xi + 1.0)) - 1.0) / (2.0 * hp.rho);
        out.gamma[m] = std::max(g, hp.gamma_min);
    }
    out.active = select_support(out.gamma, hp.support_threshold, hp.max_paths);
    return out;
}

// ---------------------------------------------------------------------------
// Stage 2
// ---------------------------------------------------------------------------

namespace
{

template <typename Solve>
RVec solve_pn_system(const CVec &r, const CMat &Phi, const CVec &mu, const RMat &B, Solve &&c_inv)
{
    if (Phi.rows() != r.size() || Phi.cols() != mu.size() || B.rows() != r.size())
        throw DimensionError("update_pn_coeffs: dimension mismatch");
    const CVec recon = Phi * mu;
    const CVec rbar = r - recon;
    const CMat V = Complex(0.0, 1.0) * scale_rows(recon, B.cast<Complex>());

    const CMat CiV = c_inv(V);
    const CMat CirM = c_inv(CMat(rbar));
    RMat A = (V.adjoint() * CiV).real();
    A.diagonal().array() += 0.5;
    const RVec b = (V.adjoint() * CirM.col(0)).real();
    // A is symmetric positive definite thanks to the I/2 term.
    return A.llt().solve(b);
}

} // namespace

RVec update_pn_coeffs(const CVec &r, const CMat &Phi, const CVec &mu, const RMat &B, const Posterior &post)
{
    return solve_pn_system(r, Phi, mu, B, [&](const CMat &X) { return post.marginal_solve(X); });
}

RVec update_pn_coeffs_white(const CVec &r, const CMat &Phi, const CVec &mu, const RMat &B, double noise_var)
{
    if (!(noise_var > 0.0))
        throw InputError("update_pn_coeffs_white: noise_var must be positive");
    return solve_pn_system(r, Phi, mu, B, [&](const CMat &X) { return CMat(X / noise_var); });
}

// ---------------------------------------------------------------------------
// Stage 3
// ---------------------------------------------------------------------------

OffsetSolve solve_doppler_offsets(const CVec &r, const CMat &Phi, const CMat &Omega, const CVec &pn,
                                  const Posterior &post, std::span<const int> active)
{
    const auto k = static_cast<Eigen::Index>(active.size());
    OffsetSolve out;
    out.xi = RVec::Zero(k);
    if (k == 0)
        return out;

    const CVec &mu = post.mu;
    const CVec err = r - pn.cwiseProduct(Phi * mu);
    const CVec derot = pn.conjugate().cwiseProduct(err);

    CMat Om(Omega.rows(), k);
    for (Eigen::Index a = 0; a < k; ++a)
        Om.col(a) = Omega.col(active[a]);
    const CMat gram = Om.adjoint() * Om;
    const CMat S = post.sigma_block(active);

    RMat Q(k, k);
    RVec d(k);
    for (Eigen::Index a = 0; a < k; ++a)
    {
        const int p = active[a];
        for (Eigen::Index b = 0; b < k; ++b)
        {
            const Complex second = mu[p] * std::conj(mu[active[b]]) + S(a, b);
            Q(a, b) = (std::conj(gram(a, b)) * second).real();
        }
        const CVec PhiSigma = Phi * post.sigma_column(p);
        const Complex lin = std::conj(mu[p]) * Om.col(a).dot(derot);
        const Complex tr = Om.col(a).dot(PhiSigma);
        d[a] = (lin - tr).real();
    }
    Q = 0.5 * (Q + Q.transpose()).eval();

    Eigen::LDLT<RMat> ldlt(Q);
    const double scale = Q.diagonal().cwiseAbs().maxCoeff();
    bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() && scale > 0.0 && ldlt.rcond() > 1e-12;
    if (ok)
    {
        out.xi = ldlt.solve(d);
        ok = out.xi.allFinite();
    }
    if (!ok)
    {
        const double load = std::max(1e-8 * scale, 1e-300);
        RMat Ql = Q;
        Ql.diagonal().array() += load;
        out.xi = Ql.ldlt().solve(d);
        if (!out.xi.allFinite())
            out.xi.setZero();
        out.loaded = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

JpnceSbl::JpnceSbl(SblHyperParams hp, EstimatorOptions opts) : hp_(hp), opts_(opts) { hp_.validate(); }

ChannelEstimate JpnceSbl::run(const CVec &r_in, const CVec &pilot, const Grid &grid0, const RMat &pn_basis) const
{
    const Eigen::Index N = r_in.size();
    if (pilot.size() != N)
        throw DimensionError("JpnceSbl::run: pilot and observation lengths differ");
    const bool use_pn = opts_.pn_compensation && pn_basis.size() > 0;
    if (use_pn && pn_basis.rows() != N)
        throw DimensionError("JpnceSbl::run: PN basis must have N rows");
    if (!all_finite(r_in))
        throw InputError("JpnceSbl::run: observation contains non-finite values");

    ChannelEstimate est;
    Diagnostics &diag = est.diag;
    const Eigen::Index L = use_pn ? pn_basis.cols() : 0;
    est.eta = RVec::Zero(L);
    est.phi_hat = RVec::Zero(N);

    // The loop runs on r / rms(r) so that gamma = 1 and beta = 1 are
    // initial values on the scale of the data.
    const double rms = std::sqrt(r_in.squaredNorm() / static_cast<double>(N));
    if (!(rms > 0.0))
        return est;
    const CVec r = r_in / rms;

    Grid grid = grid0;
    if (opts_.grid_mode == GridMode::FixedFirstOrder)
        grid.reset_offsets();
    const int M = grid.size();
    const DictionaryReference ref = opts_.reference;

    // Phi/Omega: expansion point of the Doppler Taylor model.
    // PhiEff: dictionary the posterior is computed with. In fixed-grid mode
    // Phi/Omega never change and PhiEff = Phi + Omega diag(xi).
    CMat Phi = build_dictionary(grid, pilot, ref);
    CMat Omega = build_derivative(grid, pilot, ref);
    CMat PhiEff = Phi;

    RVec eta = RVec::Zero(L);
    CVec pn = CVec::Ones(N);

    Posterior post = posterior_update(r, PhiEff, RVec::Ones(M), 1.0);
    diag.jitter_count += post.jittered;

    for (int it = 1; it <= hp_.n_iter; ++it)
    {
        // Stage 1
        const HyperUpdate hu = update_hyperparams(r, pn.asDiagonal() * PhiEff, post, hp_);
        diag.beta_clamp_count += hu.clamped;
        if (!hu.gamma.allFinite() || !std::isfinite(hu.beta))
            throw NumericError("JpnceSbl: non-finite hyperparameters at iteration " + std::to_string(it), it);
        const double change = (hu.gamma - post.gamma()).norm() / post.gamma().norm();

        // Stage 2
        if (use_pn)
        {
            eta = update_pn_coeffs(r, PhiEff, post.mu, pn_basis, post);
            if (!eta.allFinite())
                throw NumericError("JpnceSbl: non-finite PN coefficients at iteration " + std::to_string(it), it);
            pn = phase_rotation(pn_basis * eta);
        }

        // Stage 3
        if (!hu.active.empty())
        {
            const OffsetSolve step = solve_doppler_offsets(r, Phi, Omega, pn, post, hu.active);
            diag.loading_count += step.loaded;
            for (std::size_t a = 0; a < hu.active.size(); ++a)
            {
                const int m = hu.active[a];
                const double target = opts_.grid_mode == GridMode::Evolve ? grid.offset(m) + step.xi[a] : step.xi[a];
                diag.clip_count += grid.set_offset(m, target);
            }
            if (opts_.grid_mode == GridMode::Evolve)
            {
                refresh_columns(grid, pilot, hu.active, Phi, Omega, ref);
                for (int m : hu.active)
                    PhiEff.col(m) = Phi.col(m);
            }
            else
            {
                for (int m : hu.active)
                    PhiEff.col(m) = Phi.col(m) + Omega.col(m) * grid.offset(m);
            }
        }

        // E-step
        const CMat Psi = pn.asDiagonal() * PhiEff;
        post = posterior_update(r, Psi, hu.gamma, hu.beta);
        diag.jitter_count += post.jittered;
        if (!all_finite(post.mu))
            throw NumericError("JpnceSbl: non-finite posterior mean at iteration " + std::to_string(it), it);
        diag.residual_norms.push_back(rms * (r - Psi * post.mu).norm());
        diag.iterations = it;
        diag.final_gamma_change = change;
        if (change < hp_.epsilon)
        {
            diag.converged = true;
            break;
        }
    }

    est.support = select_support(post.gamma(), hp_.support_threshold, 0);
    for (int m : est.support)
        est.paths.paths.push_back(Path{rms * post.mu[m] * dictionary_phase(grid.doppler(m), static_cast<int>(N), ref),
                                       grid.delay(m), grid.doppler(m)});
    est.eta = eta;
    if (use_pn)
        est.phi_hat = pn_basis * eta;
    est.noise_var = rms * rms / post.beta();
    return est;
}

} // namespace afdm
