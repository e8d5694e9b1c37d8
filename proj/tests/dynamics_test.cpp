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

#include "magbell/dynamics.hpp"
#include "magbell/measurement.hpp"
#include "magbell/model.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magbell;

namespace {

Matrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix h(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) h(i, j) = cplx(nd(rng), nd(rng));
    }
    return 0.5 * (h + h.adjoint());
}

double unitarity_error(const Matrix& u) {
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

}  // namespace

TEST(Propagator, IdentityGroupPropertyAndUnitarity) {
    std::mt19937_64 rng(11);
    const HilbertSpace space = jc_space(2);
    const Operator h(space, random_hermitian(12, rng));
    EXPECT_LE(max_abs(propagator(h, 0.0).matrix() - Matrix::Identity(12, 12)), 1e-14);
    const Matrix lhs = (propagator(h, 0.37) * propagator(h, 1.21)).matrix();
    EXPECT_LE(max_abs(lhs - propagator(h, 1.58).matrix()), 1e-12);
    EXPECT_LE(unitarity_error(propagator(h, 5.0).matrix()), 1e-12);

    const Propagator cached(h);
    EXPECT_LE(max_abs(cached(0.9).matrix() - propagator(h, 0.9).matrix()), 1e-14);

    Matrix bad = h.matrix();
    bad(0, 1) += 0.1;
    expect_error(ErrorKind::NonHermitian, [&] { (void)propagator(Operator(space, bad), 1.0); });
}

TEST(Propagator, RabiReturnAmplitude) {
    const double G = 1e-3;
    const HilbertSpace space = jc_space(3);
    const Operator h = build_jc_effective(EffectiveParams::resonant(G, 2.0 * G), space);
    const std::size_t g10 = space.index({kLevelG, 1, 0});
    for (double t : {100.0, 777.0, 2500.0}) {
        EXPECT_NEAR(std::abs(propagator(h, t)(g10, g10) - std::cos(G * t)), 0.0, 1e-12);
    }
}

TEST(Master, ClosedSystemMatchesPropagator) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const HilbertSpace space{{"atom", 3}, {"n", 4}, {"m", 4}};  // dim 48
        const Operator h(space, 0.1 * random_hermitian(48, rng));
        Vector psi = random_hermitian(48, rng).col(0);
        psi.normalize();
        const QuantumState rho0 = QuantumState::pure(space, psi).to_mixed();
        const QuantumState out = integrate_master(rho0, LindbladSpec{h, {}}, 10.0, IntegratorConfig{0.01});
        const QuantumState exact = QuantumState::pure(space, propagator(h, 10.0).matrix() * psi);
        EXPECT_GE(fidelity(out, exact), 1.0 - 1e-8);
    }
}

TEST(Master, DampedOscillatorDecay) {
    const std::size_t dim = 6;
    const HilbertSpace space = mode_space(dim, "n");
    const double omega = 0.3;
    const double gamma = 0.05;
    const Operator h = omega * number_operator(dim);
    // Coherent input keeps several Fock levels populated.
    const QuantumState rho0 = coherent_state(1.0, dim, 1e-2).to_mixed();
    const Operator num = number_operator(dim);
    const double n0 = (num.matrix() * rho0.density()).trace().real();
    const LindbladSpec spec{h, {{annihilation(dim), gamma}}};
    for (double t : {5.0, 20.0}) {
        const QuantumState out = integrate_master(rho0, spec, t, IntegratorConfig{0.01});
        const double nt = (num.matrix() * out.density()).trace().real();
        EXPECT_NEAR(nt, std::exp(-gamma * t) * n0, 1e-6);
        EXPECT_NEAR(out.density().trace().real(), 1.0, 1e-8);
        EXPECT_LE(hermiticity_error(out.density()), 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.density());
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(Master, TraceDriftRaisesStepSizeError) {
    const HilbertSpace space = mode_space(4);
    const LindbladSpec spec{10.0 * number_operator(4), {{annihilation(4), 5.0}}};
    const QuantumState rho0 = basis_state(space, {3}).to_mixed();
    expect_error(ErrorKind::StepSize, [&] { (void)integrate_master(rho0, spec, 5.0, IntegratorConfig{0.5}); });
    expect_error(ErrorKind::InvalidArgument, [&] { (void)integrate_master(rho0, spec, 5.0, IntegratorConfig{0.0}); });
}

TEST(TimeOrdered, ConstantZeroAndConvergence) {
    std::mt19937_64 rng(3);
    const HilbertSpace space = jc_space(2);
    const Operator h(space, random_hermitian(12, rng));
    const auto constant = [&](double) { return h; };
    EXPECT_LE(max_abs(time_ordered_propagator(constant, 2.0, 7).matrix() - propagator(h, 2.0).matrix()), 1e-10);

    const auto zero = [&](double) { return zero_operator(space); };
    EXPECT_LE(max_abs(time_ordered_propagator(zero, 3.0, 4).matrix() - Matrix::Identity(12, 12)), 0.0);

    const double G = 1e-3;
    const double tau = 2.0 * std::numbers::pi / (std::sqrt(2.0) * G);
    const double s = 1.0 / (tau * tau);
    const PulseCoefficients pulse{{1.3 * s, -0.7 * s, 0.4 * s, 0.2 * s}, {-0.5 * s, 0.9 * s, 0.1 * s, -0.3 * s}, tau, G};
    const auto hfun = build_time_dependent_jc(pulse, G, space);
    const Matrix u64 = time_ordered_propagator(hfun, tau, 64).matrix();
    const Matrix u128 = time_ordered_propagator(hfun, tau, 128).matrix();
    const Matrix u256 = time_ordered_propagator(hfun, tau, 256).matrix();
    const Matrix u512 = time_ordered_propagator(hfun, tau, 512).matrix();
    EXPECT_LE(unitarity_error(u512), 1e-12);
    const double d1 = max_abs(u64 - u128);
    const double d2 = max_abs(u128 - u256);
    const double d3 = max_abs(u256 - u512);
    EXPECT_GE(std::log2(d1 / d2), 1.8);
    EXPECT_LE(std::log2(d1 / d2), 2.2);
    EXPECT_GE(std::log2(d2 / d3), 1.8);
    EXPECT_LE(std::log2(d2 / d3), 2.2);

    expect_error(ErrorKind::InvalidArgument, [&] { (void)time_ordered_propagator(constant, 1.0, 0); });
}
