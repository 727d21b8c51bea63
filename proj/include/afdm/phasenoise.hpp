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

// phasenoise.hpp - receive-side Wiener phase noise and its reduced-rank
// basis expansion phi ~= B eta.

#pragma once

#include "afdm/types.hpp"

namespace afdm
{

// [R]_{m,n} = sigma2 (min(m, n) + 1).
RMat wiener_covariance(int N, double sigma2);

// phi_n = phi_{n-1} + delta_n with phi_{-1} = 0, delta_n ~ N(0, sigma2).
RVec sample_wiener(Rng &rng, int N, double sigma2);

// Symmetric eigendecomposition with eigenvalues in nonincreasing order.
// Each eigenvector is signed so its first entry above 1e-12 * max|entry|
// is positive, which makes the basis reproducible.
struct EigenPairs
{
    RVec values;
    RMat vectors;
};
EigenPairs sorted_eigen(const RMat &R);

// B = U_{1:L} D_{1:L}^{1/2}.
RMat pn_basis(const RMat &R, int L);

struct PnModel
{
    double sigma2 = 1e-4;
    int N = 0;
    int L = 0;
    RMat R;           // N x N covariance
    RVec eigenvalues; // all N, nonincreasing
    RMat B;           // N x L basis

    static PnModel build(int N, double sigma2, int L);

    // Fraction of the trace captured by the first L eigenvalues.
    double captured_energy() const;
};

// exp(j B eta) on the diagonal.
Eigen::DiagonalMatrix<Complex, Eigen::Dynamic> pn_matrix(const RVec &eta, const RMat &B);
// I + j diag(B eta); only used by the linearized PN update.
Eigen::DiagonalMatrix<Complex, Eigen::Dynamic> pn_matrix_linearized(const RVec &eta, const RMat &B);

// exp(j phi) as a vector.
CVec phase_rotation(const RVec &phi);

} // namespace afdm
