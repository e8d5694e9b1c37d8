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

#include "magbell/error.hpp"
#include "magbell/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace magbell {

struct Subsystem {
    std::string label;
    std::size_t dim = 0;

    bool operator==(const Subsystem&) const = default;
};

// Ordered tensor-product layout. The first subsystem varies slowest:
// index(i0, i1, ..., ik) = i0*d1*...*dk + i1*d2*...*dk + ... + ik.
class HilbertSpace {
public:
    HilbertSpace(std::initializer_list<Subsystem> subsystems)
        : HilbertSpace(std::vector<Subsystem>(subsystems)) {}

    explicit HilbertSpace(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
        if (subsystems_.empty()) fail(ErrorKind::InvalidDimension, "empty Hilbert space");
        total_dim_ = 1;
        for (std::size_t i = 0; i < subsystems_.size(); ++i) {
            if (subsystems_[i].dim == 0) {
                fail(ErrorKind::InvalidDimension, "subsystem '" + subsystems_[i].label + "' has zero dimension");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (subsystems_[j].label == subsystems_[i].label) {
                    fail(ErrorKind::InvalidArgument, "duplicate subsystem label '" + subsystems_[i].label + "'");
                }
            }
            total_dim_ *= subsystems_[i].dim;
        }
    }

    const std::vector<Subsystem>& subsystems() const { return subsystems_; }
    std::size_t size() const { return subsystems_.size(); }
    std::size_t total_dim() const { return total_dim_; }

    bool contains(const std::string& label) const {
        for (const auto& s : subsystems_) {
            if (s.label == label) return true;
        }
        return false;
    }

    std::size_t slot(const std::string& label) const {
        for (std::size_t i = 0; i < subsystems_.size(); ++i) {
            if (subsystems_[i].label == label) return i;
        }
        fail(ErrorKind::UnknownLabel, "no subsystem labelled '" + label + "'");
    }

    std::size_t dim(const std::string& label) const { return subsystems_[slot(label)].dim; }

    std::size_t index(std::span<const std::size_t> occupation) const {
        if (occupation.size() != subsystems_.size()) {
            fail(ErrorKind::DimensionMismatch, "occupation list length does not match subsystem count");
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < subsystems_.size(); ++i) {
            if (occupation[i] >= subsystems_[i].dim) {
                fail(ErrorKind::DimensionMismatch, "occupation exceeds dimension of '" + subsystems_[i].label + "'");
            }
            idx = idx * subsystems_[i].dim + occupation[i];
        }
        return idx;
    }

    std::size_t index(std::initializer_list<std::size_t> occupation) const {
        return index(std::span<const std::size_t>(occupation.begin(), occupation.size()));
    }

    std::vector<std::size_t> occupation(std::size_t idx) const {
        std::vector<std::size_t> occ(subsystems_.size());
        for (std::size_t i = subsystems_.size(); i-- > 0;) {
            occ[i] = idx % subsystems_[i].dim;
            idx /= subsystems_[i].dim;
        }
        return occ;
    }

    HilbertSpace without(const std::string& label) const {
        const std::size_t s = slot(label);
        std::vector<Subsystem> rest;
        for (std::size_t i = 0; i < subsystems_.size(); ++i) {
            if (i != s) rest.push_back(subsystems_[i]);
        }
        return HilbertSpace(std::move(rest));
    }

    bool operator==(const HilbertSpace& other) const { return subsystems_ == other.subsystems_; }

private:
    std::vector<Subsystem> subsystems_;
    std::size_t total_dim_ = 1;
};

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
    if (!(a == b)) fail(ErrorKind::SpaceMismatch, std::string(what) + ": operands live on different spaces");
}

class Operator {
public:
    Operator(HilbertSpace space, Matrix matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
        const auto n = static_cast<Eigen::Index>(space_.total_dim());
        if (matrix_.rows() != n || matrix_.cols() != n) {
            fail(ErrorKind::DimensionMismatch, "matrix shape does not match space dimension");
        }
    }

    const HilbertSpace& space() const { return space_; }
    const Matrix& matrix() const { return matrix_; }
    std::size_t dim() const { return space_.total_dim(); }

    cplx operator()(std::size_t row, std::size_t col) const {
        return matrix_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    Operator adjoint() const { return {space_, matrix_.adjoint()}; }
    double hermiticity_error() const { return magbell::hermiticity_error(matrix_); }
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_error() <= tol; }

    friend Operator operator+(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "operator +");
        return {a.space_, a.matrix_ + b.matrix_};
    }
    friend Operator operator-(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "operator -");
        return {a.space_, a.matrix_ - b.matrix_};
    }
    friend Operator operator*(const Operator& a, const Operator& b) {
        require_same_space(a.space_, b.space_, "operator *");
        return {a.space_, a.matrix_ * b.matrix_};
    }
    friend Operator operator*(cplx s, const Operator& a) { return {a.space_, s * a.matrix_}; }
    friend Operator operator*(double s, const Operator& a) { return {a.space_, s * a.matrix_}; }

private:
    HilbertSpace space_;
    Matrix matrix_;
};

inline Operator commutator(const Operator& a, const Operator& b) {
    return a * b - b * a;
}

inline Operator identity(const HilbertSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return {space, Matrix::Identity(n, n)};
}

inline Operator zero_operator(const HilbertSpace& space) {
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    return {space, Matrix::Zero(n, n)};
}

inline HilbertSpace mode_space(std::size_t dim, std::string label = "mode") {
    return HilbertSpace{{std::move(label), dim}};
}

inline Operator identity(std::size_t dim) { return identity(mode_space(dim)); }

/// Lowering operator with sqrt(k) at (k-1, k).
inline Operator annihilation(std::size_t dim) {
    if (dim < 2) fail(ErrorKind::InvalidDimension, "annihilation operator needs dim >= 2");
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return {mode_space(dim), a};
}

inline Operator number_operator(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix num = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) num(k, k) = static_cast<double>(k);
    return {mode_space(dim), num};
}

/// |row><col| on a single subsystem of dimension dim.
inline Operator transition(std::size_t dim, std::size_t row, std::size_t col) {
    if (row >= dim || col >= dim) fail(ErrorKind::InvalidArgument, "transition index out of range");
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(n, n);
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = 1.0;
    return {mode_space(dim), m};
}

/// identity (x) ... (x) op (x) ... (x) identity, with op placed at `label`.
inline Operator embed(const Operator& op, const HilbertSpace& space, const std::string& label) {
    if (op.space().size() != 1) fail(ErrorKind::InvalidArgument, "embed expects a single-subsystem operator");
    const std::size_t s = space.slot(label);
    const std::size_t d = space.subsystems()[s].dim;
    if (op.dim() != d) {
        fail(ErrorKind::DimensionMismatch, "operator dim " + std::to_string(op.dim()) + " does not match slot '" +
                                               label + "' of dim " + std::to_string(d));
    }
    std::size_t left = 1;
    std::size_t right = 1;
    for (std::size_t i = 0; i < s; ++i) left *= space.subsystems()[i].dim;
    for (std::size_t i = s + 1; i < space.size(); ++i) right *= space.subsystems()[i].dim;

    const auto n = static_cast<Eigen::Index>(space.total_dim());
    Matrix out = Matrix::Zero(n, n);
    const Matrix& m = op.matrix();
    const auto di = static_cast<Eigen::Index>(d);
    const auto ri = static_cast<Eigen::Index>(right);
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(left); ++l) {
        for (Eigen::Index i = 0; i < di; ++i) {
            for (Eigen::Index j = 0; j < di; ++j) {
                const cplx v = m(i, j);
                if (v == cplx{}) continue;
                const Eigen::Index row0 = (l * di + i) * ri;
                const Eigen::Index col0 = (l * di + j) * ri;
                for (Eigen::Index r = 0; r < ri; ++r) out(row0 + r, col0 + r) = v;
            }
        }
    }
    return {space, std::move(out)};
}

/// Diagonal (-1)^(sum of occupations over `labels`).
inline Operator parity_operator(const HilbertSpace& space, const std::vector<std::string>& labels) {
    std::vector<std::size_t> slots;
    for (const auto& l : labels) slots.push_back(space.slot(l));
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    Matrix q = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto occ = space.occupation(static_cast<std::size_t>(k));
        std::size_t total = 0;
        for (auto s : slots) total += occ[s];
        q(k, k) = (total % 2 == 0) ? 1.0 : -1.0;
    }
    return {space, q};
}

enum class StateKind { Pure, Mixed };

class QuantumState {
public:
    static QuantumState pure(HilbertSpace space, Vector psi, double tol = 1e-10) {
        if (psi.size() != static_cast<Eigen::Index>(space.total_dim())) {
            fail(ErrorKind::DimensionMismatch, "state vector length does not match space dimension");
        }
        if (std::abs(psi.norm() - 1.0) > tol) {
            fail(ErrorKind::InvalidArgument, "pure state is not normalized (norm " + std::to_string(psi.norm()) + ")");
        }
        return QuantumState(std::move(space), StateKind::Pure, std::move(psi), Matrix());
    }

    /// Normalizes `psi` first; throws on a zero vector.
    static QuantumState pure_normalized(HilbertSpace space, Vector psi) {
        const double n = psi.norm();
        if (n == 0.0) fail(ErrorKind::InvalidArgument, "cannot normalize a zero vector");
        return pure(std::move(space), psi / n);
    }

    static QuantumState mixed(HilbertSpace space, Matrix rho, double tol = 1e-10) {
        const auto n = static_cast<Eigen::Index>(space.total_dim());
        if (rho.rows() != n || rho.cols() != n) {
            fail(ErrorKind::DimensionMismatch, "density matrix shape does not match space dimension");
        }
        if (magbell::hermiticity_error(rho) > tol) fail(ErrorKind::InvalidArgument, "density matrix is not Hermitian");
        if (std::abs(rho.trace().real() - 1.0) > tol) {
            fail(ErrorKind::InvalidArgument, "density matrix trace is " + std::to_string(rho.trace().real()));
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -tol) fail(ErrorKind::InvalidArgument, "density matrix is not positive");
        return QuantumState(std::move(space), StateKind::Mixed, Vector(), std::move(rho));
    }

    const HilbertSpace& space() const { return space_; }
    StateKind kind() const { return kind_; }
    bool is_pure() const { return kind_ == StateKind::Pure; }

    const Vector& vector() const {
        if (!is_pure()) fail(ErrorKind::InvalidArgument, "state is mixed");
        return psi_;
    }

    Matrix density() const {
        if (is_pure()) return psi_ * psi_.adjoint();
        return rho_;
    }

    QuantumState to_mixed() const {
        if (!is_pure()) return *this;
        return QuantumState(space_, StateKind::Mixed, Vector(), density());
    }

    /// Diagonal of the density matrix in the product basis.
    Eigen::VectorXd populations() const {
        if (is_pure()) return psi_.cwiseAbs2();
        return rho_.diagonal().real();
    }

private:
    QuantumState(HilbertSpace space, StateKind kind, Vector psi, Matrix rho)
        : space_(std::move(space)), kind_(kind), psi_(std::move(psi)), rho_(std::move(rho)) {}

    HilbertSpace space_;
    StateKind kind_;
    Vector psi_;
    Matrix rho_;
};

inline QuantumState basis_state(const HilbertSpace& space, std::initializer_list<std::size_t> occupation) {
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
    psi(static_cast<Eigen::Index>(space.index(occupation))) = 1.0;
    return QuantumState::pure(space, std::move(psi));
}

/// Kronecker product of per-subsystem vectors, in space order.
inline QuantumState product_state(const HilbertSpace& space, const std::vector<Vector>& factors) {
    if (factors.size() != space.size()) fail(ErrorKind::DimensionMismatch, "one factor per subsystem required");
    Vector psi = Vector::Ones(1);
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (factors[i].size() != static_cast<Eigen::Index>(space.subsystems()[i].dim)) {
            fail(ErrorKind::DimensionMismatch, "factor length does not match subsystem '" + space.subsystems()[i].label + "'");
        }
        Vector next(psi.size() * factors[i].size());
        for (Eigen::Index a = 0; a < psi.size(); ++a) {
            next.segment(a * factors[i].size(), factors[i].size()) = psi(a) * factors[i];
        }
        psi = std::move(next);
    }
    return QuantumState::pure_normalized(space, std::move(psi));
}

/// Poisson weight lost beyond the cutoff: 1 - sum_{j<dim} e^{-|b|^2}|b|^{2j}/j!.
inline double coherent_leakage(cplx beta, std::size_t dim) {
    const double mean = std::norm(beta);
    double term = std::exp(-mean);
    double kept = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        kept += term;
        term *= mean / static_cast<double>(j + 1);
    }
    return std::max(0.0, 1.0 - kept);
}

inline constexpr double kDefaultLeakageTolerance = 1e-6;

/// Smallest cutoff >= floor whose coherent leakage is within tolerance.
inline std::size_t coherent_cutoff(cplx beta, std::size_t floor = 2, double tolerance = kDefaultLeakageTolerance) {
    std::size_t dim = std::max<std::size_t>(floor, 2);
    while (coherent_leakage(beta, dim) > tolerance) ++dim;
    return dim;
}

inline Vector coherent_amplitudes(cplx beta, std::size_t dim) {
    Vector v(static_cast<Eigen::Index>(dim));
    cplx amp = std::exp(-0.5 * std::norm(beta));
    for (std::size_t j = 0; j < dim; ++j) {
        v(static_cast<Eigen::Index>(j)) = amp;
        amp *= beta / std::sqrt(static_cast<double>(j + 1));
    }
    return v;
}

/// Truncated coherent state, renormalized after checking the Poisson tail.
inline QuantumState coherent_state(cplx beta, std::size_t dim, double leakage_tolerance = kDefaultLeakageTolerance) {
    if (dim < 1) fail(ErrorKind::InvalidDimension, "coherent state needs dim >= 1");
    const double leak = coherent_leakage(beta, dim);
    if (leak > leakage_tolerance) {
        fail(ErrorKind::Truncation, "coherent state |beta|^2=" + std::to_string(std::norm(beta)) + " leaks " +
                                        std::to_string(leak) + " beyond cutoff " + std::to_string(dim));
    }
    return QuantumState::pure_normalized(mode_space(dim), coherent_amplitudes(beta, dim));
}

/// <target|rho|target> for mixed states, |<target|psi>|^2 for pure ones.
inline double fidelity(const QuantumState& state, const QuantumState& target) {
    require_same_space(state.space(), target.space(), "fidelity");
    const Vector& t = target.vector();
    double f = 0.0;
    if (state.is_pure()) {
        f = std::norm(t.dot(state.vector()));
    } else {
        f = t.dot(state.density() * t).real();
    }
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace magbell
