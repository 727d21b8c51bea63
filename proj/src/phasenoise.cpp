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

#include "afdm/phasenoise.hpp"

#include <boost/random/normal_distribution.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace afdm
{

RMat wiener_covariance(int N, double sigma2)
{
    if (!(sigma2 > 0.0))
        throw InputError("wiener_covariance: sigma2 must be positive");
    if (N < 1)
        throw InputError("wiener_covariance: N must be positive");
    RMat R(N, N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n)
            R(m, n) = sigma2 * (std::min(m, n) + 1);
    return R;
}

RVec sample_wiener(Rng &rng, int N, double sigma2)
{
    if (sigma2 < 0.0)
        throw InputError("sample_wiener: sigma2 must be non-negative");
    RVec phi = RVec::Zero(N);
    if (sigma2 == 0.0)
        return phi;
    boost::random::normal_distribution<double> innovation(0.0, std::sqrt(sigma2));
    double acc = 0.0;
    for (int n = 0; n < N; ++n)
    {
        acc += innovation(rng);
        phi[n] = acc;
    }
    return phi;
}

EigenPairs sorted_eigen(const RMat &R)
{
    Eigen::SelfAdjointEigenSolver<RMat> solver(R);
    if (solver.info() != Eigen::Success)
        throw NumericError("sorted_eigen: eigensolver failed");

    const int N = static_cast<int>(R.rows());
    EigenPairs out;
    out.values.resize(N);
    out.vectors.resize(N, N);
    // Eigen returns ascending order.
    for (int i = 0; i < N; ++i)
    {
        out.values[i] = solver.eigenvalues()[N - 1 - i];
        RVec v = solver.eigenvectors().col(N - 1 - i);
        const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
        for (int n = 0; n < N; ++n)
            if (std::abs(v[n]) > tol)
            {
                if (v[n] < 0.0)
                    v = -v;
                break;
            }
        out.vectors.col(i) = v;
    }
    return out;
}

RMat pn_basis(const RMat &R, int L)
{
    if (L < 1 || L > R.rows())
        throw InputError("pn_basis: L must lie in [1, N]");
    const EigenPairs eig = sorted_eigen(R);
    RMat B = eig.vectors.leftCols(L);
    for (int i = 0; i < L; ++i)
        B.col(i) *= std::sqrt(std::max(eig.values[i], 0.0));
    return B;
}

PnModel PnModel::build(int N, double sigma2, int L)
{
    if (L < 1 || L > N)
        throw InputError("PnModel: L must lie in [1, N]");
    PnModel model;
    model.sigma2 = sigma2;
    model.N = N;
    model.L = L;
    model.R = wiener_covariance(N, sigma2);
    const EigenPairs eig = sorted_eigen(model.R);
    model.eigenvalues = eig.values;
    model.B = eig.vectors.leftCols(L);
    for (int i = 0; i < L; ++i)
        model.B.col(i) *= std::sqrt(std::max(eig.values[i], 0.0));
    return model;
}

double PnModel::captured_energy() const { return eigenvalues.head(L).sum() / eigenvalues.sum(); }

Eigen::DiagonalMatrix<Complex, Eigen::Dynamic> pn_matrix(const RVec &eta, const RMat &B)
{
    if (eta.size() != B.cols())
        throw DimensionError("pn_matrix: eta length must equal L");
    return Eigen::DiagonalMatrix<Complex, Eigen::Dynamic>(phase_rotation(B * eta));
}

Eigen::DiagonalMatrix<Complex, Eigen::Dynamic> pn_matrix_linearized(const RVec &eta, const RMat &B)
{
    if (eta.size() != B.cols())
        throw DimensionError("pn_matrix_linearized: eta length must equal L");
    const RVec phi = B * eta;
    CVec d(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n)
        d[n] = Complex(1.0, phi[n]);
    return Eigen::DiagonalMatrix<Complex, Eigen::Dynamic>(d);
}

CVec phase_rotation(const RVec &phi)
{
    CVec d(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n)
        d[n] = std::polar(1.0, phi[n]);
    return d;
}

} // namespace afdm
