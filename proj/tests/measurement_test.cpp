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

#include "magbell/measurement.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace magbell;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent oracle for <g,n,m|exp(-iH tau)|g,n,m>: diagonalize the 3x3 block
// {|g,n,m>, |e,n-1,m>, |f,n,m-1>} by itself (dropping absent members).
cplx block_return_amplitude(std::size_t n, std::size_t m, double Ge, double Gf, double Delta, double tau) {
    Eigen::Matrix3cd h = Eigen::Matrix3cd::Zero();
    h(1, 1) = Delta;
    h(2, 2) = Delta;
    h(0, 1) = h(1, 0) = Ge * std::sqrt(static_cast<double>(n));
    h(0, 2) = h(2, 0) = Gf * std::sqrt(static_cast<double>(m));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(h);
    cplx amp = 0.0;
    for (int k = 0; k < 3; ++k) {
        const cplx c = es.eigenvectors()(0, k);
        amp += std::norm(c) * std::exp(-kI * (es.eigenvalues()(k) * tau));
    }
    return amp;
}

EffectiveParams resonant_pair() { return EffectiveParams::resonant(1e-3, 1e-3); }

}  // namespace

TEST(Rabi, Frequencies) {
    const EffectiveParams eff = resonant_pair();
    EXPECT_DOUBLE_EQ(rabi_frequency(0, 0, eff, 4e-4), 2e-4);
    EXPECT_NEAR(rabi_frequency(1, 1, eff, 0.0), std::sqrt(2.0) * 1e-3, 1e-18);
    EXPECT_NEAR(rabi_frequency(3, 3, eff, 0.0), std::sqrt(6.0) * 1e-3, 1e-18);
}

TEST(KrausCoefficient, KnownValues) {
    const EffectiveParams eff = resonant_pair();
    for (double delta : {0.0, 1e-3, -2e-3}) {
        for (double tau : {0.0, 123.0, 4567.0}) EXPECT_NEAR(std::abs(kraus_coefficient(0, 0, eff, delta, tau)), 1.0, 1e-15);
    }
    const double tau0 = interval_for_target(1, eff, 0.0);
    EXPECT_NEAR(std::abs(kraus_coefficient(1, 1, eff, 0.0, tau0) - 1.0), 0.0, 1e-12);
    const double expected = std::cos(std::sqrt(2.0) * kPi);
    EXPECT_NEAR(expected, -0.2663, 1e-4);
    EXPECT_NEAR(std::abs(kraus_coefficient(0, 1, eff, 0.0, tau0) - expected), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(kraus_coefficient(1, 0, eff, 0.0, tau0) - expected), 0.0, 1e-12);
}

TEST(KrausCoefficient, BoundedWithUnitRevivals) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const EffectiveParams eff = EffectiveParams::resonant(1e-3 * (0.2 + u(rng)), 1e-3 * (0.2 + u(rng)));
        const double delta = 2e-3 * (u(rng) - 0.5);
        const std::size_t n = static_cast<std::size_t>(u(rng) * 6);
        const std::size_t m = static_cast<std::size_t>(u(rng) * 6);
        EXPECT_LE(std::abs(kraus_coefficient(n, m, eff, delta, 1e4 * u(rng))), 1.0 + 1e-12);
        if (n + m > 0) {
            const double revival = 2.0 * kPi * 3.0 / rabi_frequency(n, m, eff, delta);
            EXPECT_NEAR(std::abs(kraus_coefficient(n, m, eff, delta, revival)), 1.0, 1e-12);
        }
    }
}

TEST(AnalyticKraus, IdentityAndBounds) {
    const HilbertSpace space = magnon_space(4);
    EXPECT_LE(max_abs(analytic_kraus(space, EffectiveParams::resonant(0.0, 0.0), 0.0, 500.0).matrix() -
                      Matrix::Identity(16, 16)),
              1e-15);
    const Operator v = analytic_kraus(space, EffectiveParams::resonant(1e-3, 1.3e-3), 5e-4, 3000.0);
    for (Eigen::Index k = 0; k < 16; ++k) EXPECT_LE(std::abs(v.matrix()(k, k)), 1.0 + 1e-12);
    expect_error(ErrorKind::InvalidArgument, [] { (void)analytic_kraus(jc_space(2), resonant_pair(), 0.0, 1.0); });
}

TEST(NumericKraus, IdentityAtZeroAndDiagonal) {
    const HilbertSpace space = jc_space(4);
    const Operator h = build_jc_effective(EffectiveParams::resonant(1e-3, 1.4e-3, 3e-4), space);
    EXPECT_LE(max_abs(numeric_kraus(h, 0.0).matrix() - Matrix::Identity(16, 16)), 1e-14);
    const Matrix v = numeric_kraus(h, 2345.0).matrix();
    EXPECT_LE(max_abs(v - Matrix(v.diagonal().asDiagonal())), 1e-12);
}

TEST(NumericKraus, MatchesAnalyticAndBlockOracle) {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const HilbertSpace space = jc_space(4);
    const HilbertSpace magnons = magnon_space(4);
    for (int draw = 0; draw < 25; ++draw) {
        const double Ge = 1e-3 * (0.1 + 2.0 * u(rng));
        const double Gf = 1e-3 * (0.1 + 2.0 * u(rng));
        const double delta = 4e-3 * (u(rng) - 0.5);
        const double tau = 1e4 * u(rng);
        const EffectiveParams eff = EffectiveParams::resonant(Ge, Gf, delta);
        const Matrix num = numeric_kraus(build_jc_effective(eff, space), tau).matrix();
        const Matrix ana = analytic_kraus(magnons, eff, delta, tau).matrix();
        EXPECT_LE(max_abs(num - ana), 1e-10);
        for (std::size_t n = 0; n < 4; ++n) {
            for (std::size_t m = 0; m < 4; ++m) {
                const auto k = static_cast<Eigen::Index>(magnons.index({n, m}));
                EXPECT_LE(std::abs(ana(k, k) - block_return_amplitude(n, m, Ge, Gf, delta, tau)), 1e-10);
            }
        }
    }
}

TEST(Projection, BornRuleAndNullOutcome) {
    const HilbertSpace full = jc_space(2);
    const QuantumState chi = superposed_state(2);
    Vector psi = Vector::Zero(12);
    const double theta = 0.6;
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t m = 0; m < 2; ++m) {
            const cplx c = chi.vector()(static_cast<Eigen::Index>(chi.space().index({n, m})));
            psi(static_cast<Eigen::Index>(full.index({kLevelG, n, m}))) = std::cos(theta) * c;
            psi(static_cast<Eigen::Index>(full.index({kLevelE, n, m}))) = std::sin(theta) * c;
        }
    }
    const ProjectionOutcome out = apply_projection(QuantumState::pure(full, psi));
    EXPECT_NEAR(out.probability, std::cos(theta) * std::cos(theta), 1e-14);
    EXPECT_NEAR(fidelity(out.state, chi), 1.0, 1e-14);

    const ProjectionOutcome mixed = apply_projection(QuantumState::pure(full, psi).to_mixed());
    EXPECT_NEAR(mixed.probability, std::cos(theta) * std::cos(theta), 1e-14);
    EXPECT_NEAR(fidelity(mixed.state, chi), 1.0, 1e-14);

    const QuantumState ground = basis_state(full, {kLevelG, 1, 0});
    EXPECT_NEAR(apply_projection(ground).probability, 1.0, 1e-15);
    expect_error(ErrorKind::NullOutcome, [&] { (void)apply_projection(basis_state(full, {kLevelE, 0, 1})); });
}

TEST(Protocol, FigureTwoFullInterval) {
    ProtocolConfig cfg;
    cfg.eff = resonant_pair();
    cfg.rounds = 8;
    const ProtocolRecord rec = run_protocol(superposed_state(3), cfg);
    ASSERT_EQ(rec.rounds.size(), 9u);
    EXPECT_NEAR(rec.rounds[0].fidelity_plus, 0.5, 1e-14);
    EXPECT_LE(1.0 - rec.rounds.back().fidelity_plus, 1e-9);
    EXPECT_NEAR(rec.rounds.back().success_probability, 0.5, 0.02);
    EXPECT_TRUE(rec.stalled_states.empty());
    for (std::size_t r = 1; r < rec.rounds.size(); ++r) {
        EXPECT_LE(rec.rounds[r].success_probability, rec.rounds[r - 1].success_probability + 1e-15);
    }
}

TEST(Protocol, HalfIntervalAlternates) {
    ProtocolConfig cfg;
    cfg.eff = resonant_pair();
    cfg.rounds = 15;
    cfg.interval_mode = IntervalMode::Half;
    const ProtocolRecord rec = run_protocol(superposed_state(3), cfg);
    EXPECT_NEAR(rec.tau, 0.5 * interval_for_target(1, cfg.eff, 0.0), 1e-9);
    for (std::size_t r = 1; r < rec.rounds.size(); ++r) {
        const auto& row = rec.rounds[r];
        if (r % 2 == 1) {
            EXPECT_GT(row.fidelity_minus, row.fidelity_plus);
        } else {
            EXPECT_GT(row.fidelity_plus, row.fidelity_minus);
        }
        EXPECT_GE(row.even_population, rec.rounds[r - 1].even_population - 1e-14);
    }
    EXPECT_GE(rec.target_fidelity(15), 1.0 - 1e-6);
}

TEST(Protocol, VacuumIsDark) {
    ProtocolConfig cfg;
    cfg.eff = resonant_pair();
    cfg.rounds = 5;
    const HilbertSpace nm = magnon_space(3);
    const ProtocolRecord rec = run_protocol(basis_state(nm, {0, 0}), cfg);
    for (const auto& row : rec.rounds) {
        EXPECT_NEAR(row.fidelity_plus, 0.5, 1e-14);
        EXPECT_NEAR(row.success_probability, 1.0, 1e-14);
    }
    expect_error(ErrorKind::ZeroTargetOverlap, [&] { (void)run_protocol(basis_state(nm, {0, 1}), cfg); });
}

TEST(Protocol, ClosedDynamicsPropertiesOnRandomStates) {
    std::mt19937_64 rng(404);
    std::normal_distribution<double> nd;
    ProtocolConfig cfg;
    cfg.eff = EffectiveParams::resonant(1e-3, 1.2e-3);
    cfg.rounds = 6;
    const HilbertSpace nm = magnon_space(3);
    const auto target = detail::target_indices(nm, 1);
    const Operator v = analytic_kraus(nm, cfg.eff, 0.0, cfg.interval());
    for (int trial = 0; trial < 20; ++trial) {
        Vector psi(9);
        for (auto& c : psi) c = cplx(nd(rng), nd(rng));
        psi.normalize();
        const QuantumState init = QuantumState::pure(nm, psi);
        const ProtocolRecord rec = run_protocol(init, cfg);
        const double pair = std::norm(psi(target.vacuum)) + std::norm(psi(target.excited));
        EXPECT_GE(rec.rounds.back().success_probability, pair - 1e-10);

        // unnormalized populations: target pair conserved, others damped by |alpha|^2
        const Eigen::VectorXd p0 = init.populations();
        const Eigen::VectorXd pM = rec.final_state.populations() * rec.rounds.back().success_probability;
        for (Eigen::Index k = 0; k < 9; ++k) {
            const double damp = std::pow(std::norm(v.matrix()(k, k)), static_cast<double>(cfg.rounds));
            if (k == target.vacuum || k == target.excited) {
                EXPECT_NEAR(pM(k) / p0(k), 1.0, 1e-10);
            } else {
                EXPECT_NEAR(pM(k), p0(k) * damp, 1e-12);
            }
        }
    }
}

TEST(Protocol, ConvergedOutputIsEvenParity) {
    ProtocolConfig cfg;
    cfg.eff = EffectiveParams::resonant(1e-3, 1.2e-3);
    cfg.rounds = 400;
    const HilbertSpace nm = magnon_space(2);
    const ProtocolRecord rec = run_protocol(superposed_state(2), cfg);
    const Matrix q = parity_operator(nm, {"n", "m"}).matrix();
    const Matrix rho = rec.final_state.density();
    const Matrix odd = 0.5 * (Matrix::Identity(4, 4) - q);
    EXPECT_LE((odd * rho).trace().real(), 1e-9);
    ASSERT_TRUE(rec.distilled_round.has_value());
}

TEST(Protocol, StalledStateIsReported) {
    // With G_e = G_f, Omega_02 = Omega_11, so |02> is never damped at tau_0.
    ProtocolConfig cfg;
    cfg.eff = resonant_pair();
    cfg.rounds = 3;
    const HilbertSpace nm = magnon_space(3);
    Vector psi = Vector::Zero(9);
    psi(static_cast<Eigen::Index>(nm.index({0, 0}))) = 1.0;
    psi(static_cast<Eigen::Index>(nm.index({0, 2}))) = 1.0;
    const ProtocolRecord rec = run_protocol(QuantumState::pure_normalized(nm, psi), cfg);
    ASSERT_EQ(rec.stalled_states.size(), 1u);
    EXPECT_EQ(rec.stalled_states[0], std::make_pair(std::size_t{0}, std::size_t{2}));
}

TEST(Interval, TargetSelection) {
    const EffectiveParams eff = EffectiveParams::resonant(1e-3, 1.2e-3);
    EXPECT_NEAR(interval_for_target(1, eff, 0.0), 2.0 * kPi / rabi_frequency(1, 1, eff, 0.0), 1e-9);
    for (std::size_t N = 1; N <= 4; ++N) {
        const double tau = interval_for_target(N, eff, 3e-4);
        EXPECT_NEAR(std::abs(kraus_coefficient(N, N, eff, 3e-4, tau)), 1.0, 1e-12);
        EXPECT_NEAR(interval_for_target(N, eff, 0.0) * std::sqrt(double(N)), interval_for_target(1, eff, 0.0), 1e-9);
    }
    expect_error(ErrorKind::InvalidArgument, [&] { (void)interval_for_target(0, eff, 0.0); });
}

TEST(Stabilize, NoDecayKeepsBellState) {
    ProtocolConfig cfg;
    cfg.eff = EffectiveParams::resonant(6e-3, 6e-3);
    cfg.rounds = 2;
    cfg.decoherence = Decoherence{0.0, 0.0};
    cfg.steps_per_interval = 400;
    const StabilizationRecord rec = stabilize(bell_state(magnon_space(3), 1, +1), cfg);
    ASSERT_EQ(rec.times.size(), 3u);
    for (std::size_t r = 0; r < rec.times.size(); ++r) {
        EXPECT_NEAR(rec.fidelity_stab[r], 1.0, 1e-8);
        EXPECT_NEAR(rec.fidelity_free[r], 1.0, 1e-8);
    }
    cfg.decoherence.reset();
    expect_error(ErrorKind::InvalidArgument, [&] { (void)stabilize(bell_state(magnon_space(3), 1, +1), cfg); });
}

TEST(CouplingRatio, PeakAndApproximation) {
    const double peak = coupling_ratio_fidelity(1.0, false);
    const double c = std::cos(std::sqrt(2.0) * kPi);
    EXPECT_NEAR(peak, 2.0 / (2.0 + 2.0 * c * c), 1e-14);
    EXPECT_NEAR(peak, 0.9338, 1e-4);
    double best = 0.0;
    double best_xi = 0.0;
    for (int i = 0; i <= 80; ++i) {
        const double xi = 0.8 + 0.005 * i;
        const double f = coupling_ratio_fidelity(xi, false);
        if (f > best) {
            best = f;
            best_xi = xi;
        }
        if (std::abs(xi - 1.0) <= 0.05 + 1e-12) {
            EXPECT_LE(std::abs(f - coupling_ratio_fidelity(xi, true)), 5e-3);
        }
    }
    EXPECT_NEAR(best_xi, 1.0, 0.005 + 1e-12);
    expect_error(ErrorKind::InvalidArgument, [] { (void)coupling_ratio_fidelity(0.0, false); });
}

TEST(QubitParity, Reference) {
    const HilbertSpace qubits{{"q1", 2}, {"q2", 2}};
    const Vector plus = Vector::Constant(4, 0.5);
    const ProjectionOutcome out = qubit_parity_reference(QuantumState::pure(qubits, plus));
    const QuantumState phi = bell_state(HilbertSpace{{"n", 2}, {"m", 2}}, 1, +1);
    EXPECT_NEAR(out.probability, 0.5, 1e-15);
    EXPECT_NEAR(std::abs(out.state.vector().dot(phi.vector())), 1.0, 1e-15);

    const ProjectionOutcome same = qubit_parity_reference(QuantumState::pure(qubits, phi.vector()));
    EXPECT_NEAR(same.probability, 1.0, 1e-15);
    expect_error(ErrorKind::NullOutcome, [&] { (void)qubit_parity_reference(basis_state(qubits, {0, 1})); });
}
