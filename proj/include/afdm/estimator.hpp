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

// estimator.hpp - joint phase-noise and off-grid channel estimation by
// sparse Bayesian learning (JPNCE-SBL).
//
// Model: r = P(eta) Phi(G) h + w, h ~ CN(0, diag(gamma)), w ~ CN(0, I / beta).
//
// Each EM iteration runs
//   stage 1  gamma, beta from the posterior moments; pick the active set
//   stage 2  eta from the linearized PN cost (skipped when PN compensation is off)
//   stage 3  Doppler offsets of the active grid points
//   E-step   posterior of h for the refreshed Psi = P(eta) Phi(G)
// until the relative change of gamma drops below epsilon.

#pragma once

#include "afdm/channel.hpp"
#include "afdm/phasenoise.hpp"
#include "afdm/types.hpp"

#include <span>
#include <vector>

namespace afdm
{

enum class GammaRule
{
    // gamma = (sqrt(1 + 4 rho Xi) - 1) / (2 rho); nonnegative, -> Xi as rho -> 0.
    Stabilized,
    // gamma = (sqrt(4 rho (Xi + 1)) - 1) / (2 rho), floored at gamma_min.
    // Goes negative whenever Xi + 1 < 1 / (4 rho).
    Literal,
};

struct SblHyperParams
{
    double rho = 1e-2;
    double c = 1e-6;
    double d = 1e-6;
    double epsilon = 1e-4;
    int n_iter = 100;
    double support_threshold = 1e-3; // relative to max(gamma)
    int max_paths = 6;               // cap on the active set during iteration
    GammaRule gamma_rule = GammaRule::Stabilized;
    double gamma_min = 1e-12;

    void validate() const;
};

// Gaussian posterior of the sparse gains. Sigma is never formed unless asked
// for: the factorization C = beta^{-1} I + Psi Gamma Psi^H = L L^H (N x N) and
// W = L^{-1} Psi give
//   Sigma = Gamma - Gamma W^H W Gamma,   mu = Gamma W^H L^{-1} r,
// so a single E-step costs O(N^3 + N^2 M).
class Posterior
{
  public:
    CVec mu;
    RVec sigma_diag;  // clamped at zero
    bool jittered = false;

    const RVec &gamma() const { return gamma_; }
    double beta() const { return beta_; }
    int size() const { return static_cast<int>(gamma_.size()); }

    CVec sigma_column(int m) const;
    CMat sigma_block(std::span<const int> idx) const;
    CMat sigma_full() const;

    // C^{-1} X for the marginal observation covariance C.
    CMat marginal_solve(const CMat &X) const;
    CVec marginal_solve(const CVec &x) const;

  private:
    friend Posterior posterior_update(const CVec &r, const CMat &Psi, const RVec &gamma, double beta);

    RVec gamma_;
    double beta_ = 1.0;
    CMat W_;
    Eigen::LLT<CMat> chol_;
};

Posterior posterior_update(const CVec &r, const CMat &Psi, const RVec &gamma, double beta);

struct HyperUpdate
{
    RVec gamma;
    double beta = 1.0;
    std::vector<int> active; // sorted by decreasing gamma
    double residual_norm = 0.0;
    bool clamped = false;    // C_beta < 0 from roundoff
};

HyperUpdate update_hyperparams(const CVec &r, const CMat &Psi, const Posterior &post, const SblHyperParams &hp);

// Indices with gamma > threshold * max(gamma), strongest first, at most cap.
std::vector<int> select_support(const RVec &gamma, double threshold, int cap);

// Closed-form PN coefficients under the small-angle model:
//   rbar = r - Phi mu,  V = j diag(Phi mu) B,
//   eta  = [Re(V^H C^{-1} V) + I/2]^{-1} Re(V^H C^{-1} rbar)
// with C taken from the posterior that produced mu.
RVec update_pn_coeffs(const CVec &r, const CMat &Phi, const CVec &mu, const RMat &B, const Posterior &post);

// Same update with a known white covariance C = noise_var * I.
RVec update_pn_coeffs_white(const CVec &r, const CMat &Phi, const CVec &mu, const RMat &B, double noise_var);

struct OffsetSolve
{
    RVec xi;          // one entry per active index, before clipping
    bool loaded = false;
};

// Minimizer of the expected residual with Phi + Omega diag(xi) restricted to
// the active set:
//   Q = Re{(Omega^H Omega)^* o (mu mu^H + Sigma)}
//   d = Re{diag(mu^*) Omega^H P^H (r - P Phi mu) - diag(Omega^H Phi Sigma)}
//   xi = Q^{-1} d
// Diagonal loading is applied when Q is numerically singular.
OffsetSolve solve_doppler_offsets(const CVec &r, const CMat &Phi, const CMat &Omega, const CVec &pn,
                                  const Posterior &post, std::span<const int> active);

enum class GridMode
{
    Evolve,          // move active grid points by the solved offsets
    FixedFirstOrder, // keep Phi fixed, model Phi + Omega diag(xi)
};

struct EstimatorOptions
{
    bool pn_compensation = true;
    GridMode grid_mode = GridMode::Evolve;
    DictionaryReference reference = DictionaryReference::Centred;
};

struct Diagnostics
{
    int iterations = 0;
    double final_gamma_change = 0.0;
    bool converged = false;
    std::vector<double> residual_norms;
    int clip_count = 0;
    int jitter_count = 0;
    int loading_count = 0;
    int beta_clamp_count = 0;
    int pseudo_inverse_count = 0;
};

struct ChannelEstimate
{
    PathSet paths;            // gains, delays, Dopplers on the final support
    std::vector<int> support; // grid indices, empty for grid-free estimators
    RVec eta;                 // PN coefficients (empty when not estimated)
    RVec phi_hat;             // N-length phase trajectory (zeros when not estimated)
    double noise_var = 0.0;   // 1 / beta
    Diagnostics diag;

    int p_hat() const { return static_cast<int>(paths.size()); }
};

class JpnceSbl
{
  public:
    explicit JpnceSbl(SblHyperParams hp = {}, EstimatorOptions opts = {});

    // pn_basis is N x L; it may be empty when PN compensation is disabled.
    // Throws NumericError (carrying the iteration) on a non-finite iterate.
    ChannelEstimate run(const CVec &r, const CVec &pilot, const Grid &grid0, const RMat &pn_basis) const;

    const SblHyperParams &hyper() const { return hp_; }
    const EstimatorOptions &options() const { return opts_; }

  private:
    SblHyperParams hp_;
    EstimatorOptions opts_;
};

} // namespace afdm
