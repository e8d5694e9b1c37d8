// Copyright 2026 The magbell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace magbell {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_error(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    return a * b - b * a;
}

// Spectral form of a Hermitian matrix; exp(-iHt) for any t reuses one
// eigendecomposition.
class HermitianSpectrum {
public:
    explicit HermitianSpectrum(const Matrix& h) {
        // Symmetrize so roundoff-level anti-Hermitian parts cannot leak in.
        const Matrix sym = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
        values_ = solver.eigenvalues();
        vectors_ = solver.eigenvectors();
    }

    const Eigen::VectorXd& eigenvalues() const { return values_; }
    const Matrix& eigenvectors() const { return vectors_; }

    Matrix evolution(double t) const {
        Vector phases(values_.size());
        for (Eigen::Index k = 0; k < values_.size(); ++k) {
            phases(k) = std::exp(-kI * values_(k) * t);
        }
        return vectors_ * phases.asDiagonal() * vectors_.adjoint();
    }

private:
    Eigen::VectorXd values_;
    Matrix vectors_;
};

/// exp(-i H t) for Hermitian H.
inline Matrix exp_minus_i(const Matrix& h, double t) {
    return HermitianSpectrum(h).evolution(t);
}

/// exp(S) for anti-Hermitian S, via S = -iK with K = iS Hermitian.
inline Matrix exp_anti_hermitian(const Matrix& s) {
    return exp_minus_i(kI * s, 1.0);
}

}  // namespace magbell
