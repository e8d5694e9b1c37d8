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

#include "magbell/hilbert.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace magbell {

inline constexpr double kHermitianTolerance = 1e-12;

namespace detail {

inline void require_hermitian(const Operator& h) {
    const double scale = std::max(1.0, max_abs(h.matrix()));
    const double err = h.hermiticity_error();
    if (err > kHermitianTolerance * scale) {
        fail(ErrorKind::NonHermitian, "Hamiltonian deviates from Hermitian by " + std::to_string(err));
    }
}

}  // namespace detail

/// exp(-iHt) through the Hermitian eigendecomposition.
inline Operator propagator(const Operator& H, double t) {
    detail::require_hermitian(H);
    return {H.space(), exp_minus_i(H.matrix(), t)};
}

/// Eigendecomposition cached for many propagation times.
class Propagator {
public:
    explicit Propagator(const Operator& H) : space_(H.space()), spectrum_((detail::require_hermitian(H), H.matrix())) {}

    Operator operator()(double t) const { return {space_, spectrum_.evolution(t)}; }
    const HermitianSpectrum& spectrum() const { return spectrum_; }

private:
    HilbertSpace space_;
    HermitianSpectrum spectrum_;
};

struct CollapseChannel {
    Operator op;
    double rate = 0.0;
};

struct LindbladSpec {
    Operator hamiltonian;
    std::vector<CollapseChannel> collapse;

    void validate() const {
        detail::require_hermitian(hamiltonian);
        for (const auto& c : collapse) {
            if (c.rate < 0.0) fail(ErrorKind::InvalidArgument, "collapse rate must be >= 0");
            require_same_space(c.op.space(), hamiltonian.space(), "Lindblad collapse operator");
        }
    }
};

struct IntegratorConfig {
    double dt = 0.0;
    double trace_tol = 1e-8;

    void validate() const {
        if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "integrator dt must be positive");
        if (!(trace_tol > 0.0)) fail(ErrorKind::InvalidArgument, "trace tolerance must be positive");
    }
};

/// Right-hand side of drho/dt = -i[H, rho] + sum_k rate_k D[A_k] rho, with the
/// anticommutator folded into a non-Hermitian effective Hamiltonian.
class LindbladGenerator {
public:
    explicit LindbladGenerator(const LindbladSpec& spec) {
        spec.validate();
        h_eff_ = spec.hamiltonian.matrix();
        for (const auto& c : spec.collapse) {
            if (c.rate == 0.0) continue;
            const Matrix l = std::sqrt(c.rate) * c.op.matrix();
            h_eff_ -= 0.5 * kI * (l.adjoint() * l);
            jumps_.push_back(l);
        }
    }

    Matrix operator()(const Matrix& rho) const {
        const Matrix a = -kI * (h_eff_ * rho);
        Matrix out = a + a.adjoint();
        for (const auto& l : jumps_) out.noalias() += l * rho * l.adjoint();
        return out;
    }

private:
    Matrix h_eff_;
    std::vector<Matrix> jumps_;
};

/// Fixed-step RK4 over [0, t_final]. The trace is checked, never renormalized.
inline Matrix integrate_master(const Matrix& rho0, const LindbladGenerator& gen, double t_final,
                               const IntegratorConfig& cfg) {
    cfg.validate();
    if (t_final < 0.0) fail(ErrorKind::InvalidArgument, "t_final must be >= 0");
    const auto steps = static_cast<long>(std::ceil(t_final / cfg.dt - 1e-9));
    Matrix rho = rho0;
    if (steps <= 0) return rho;
    const double h = t_final / static_cast<double>(steps);
    const double trace0 = rho0.trace().real();
    for (long s = 0; s < steps; ++s) {
        const Matrix k1 = gen(rho);
        const Matrix k2 = gen(rho + (0.5 * h) * k1);
        const Matrix k3 = gen(rho + (0.5 * h) * k2);
        const Matrix k4 = gen(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double drift = std::abs(rho.trace().real() - trace0);
        if (!(drift <= cfg.trace_tol)) {
            fail(ErrorKind::StepSize, "trace drift " + std::to_string(drift) + " exceeds tolerance at step " +
                                          std::to_string(s + 1) + "; reduce dt");
        }
    }
    return rho;
}

inline QuantumState integrate_master(const QuantumState& rho0, const LindbladSpec& spec, double t_final,
                                     const IntegratorConfig& cfg) {
    require_same_space(rho0.space(), spec.hamiltonian.space(), "integrate_master");
    const LindbladGenerator gen(spec);
    Matrix rho = integrate_master(rho0.density(), gen, t_final, cfg);
    rho = 0.5 * (rho + rho.adjoint());
    return QuantumState::mixed(rho0.space(), std::move(rho), 10.0 * cfg.trace_tol + 1e-10);
}

/// Ordered product of midpoint piecewise-constant exponentials; later slices
/// act to the left.
inline Operator time_ordered_propagator(const std::function<Operator(double)>& hamiltonian, double t_final,
                                        std::size_t slices) {
    if (slices < 1) fail(ErrorKind::InvalidArgument, "slices must be >= 1");
    const double h = t_final / static_cast<double>(slices);
    const Operator first = hamiltonian(0.5 * h);
    Matrix u = exp_minus_i(first.matrix(), h);
    for (std::size_t k = 1; k < slices; ++k) {
        const Operator hk = hamiltonian((static_cast<double>(k) + 0.5) * h);
        u = exp_minus_i(hk.matrix(), h) * u;
    }
    return {first.space(), std::move(u)};
}

}  // namespace magbell
