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

#include "magbell/dynamics.hpp"
#include "magbell/hilbert.hpp"
#include "magbell/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace magbell {

inline constexpr double kNullOutcomeThreshold = 1e-12;
inline constexpr double kStallThreshold = 1.0 - 1e-6;
inline constexpr double kDistilledThreshold = 1.0 - 1e-6;

/// Omega_nm = sqrt(G_e^2 n + G_f^2 m + Delta^2 / 4).
inline double rabi_frequency(std::size_t n, std::size_t m, const EffectiveParams& eff, double Delta) {
    return std::sqrt(eff.G_e * eff.G_e * static_cast<double>(n) + eff.G_f * eff.G_f * static_cast<double>(m) +
                     0.25 * Delta * Delta);
}

/// alpha_nm(tau) = cos(Omega tau) + i Delta/(2 Omega) sin(Omega tau).
/// alpha_00 is exp(i Delta tau / 2), the Delta -> 0 limit included.
inline cplx kraus_coefficient(std::size_t n, std::size_t m, const EffectiveParams& eff, double Delta, double tau) {
    if (n == 0 && m == 0) return std::exp(kI * (0.5 * Delta * tau));
    const double omega = rabi_frequency(n, m, eff, Delta);
    if (omega == 0.0) return {1.0, 0.0};
    return {std::cos(omega * tau), Delta / (2.0 * omega) * std::sin(omega * tau)};
}

/// Closed-form Kraus operator exp(-i Delta tau/2) sum alpha_nm |nm><nm| on [n, m].
inline Operator analytic_kraus(const HilbertSpace& space, const EffectiveParams& eff, double Delta, double tau) {
    if (space.size() != 2 || !space.contains("n") || !space.contains("m")) {
        fail(ErrorKind::InvalidArgument, "analytic_kraus expects the magnon space [n, m]");
    }
    const auto dim = static_cast<Eigen::Index>(space.total_dim());
    const std::size_t sn = space.slot("n");
    const std::size_t sm = space.slot("m");
    const cplx phase = std::exp(-kI * (0.5 * Delta * tau));
    Matrix v = Matrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const auto occ = space.occupation(static_cast<std::size_t>(k));
        v(k, k) = phase * kraus_coefficient(occ[sn], occ[sm], eff, Delta, tau);
    }
    return {space, v};
}

namespace detail {

/// Full-space indices with the atom in `level`, ordered like the reduced space.
inline std::vector<Eigen::Index> atom_block(const HilbertSpace& space, std::size_t level) {
    const std::size_t slot = space.slot("atom");
    std::vector<Eigen::Index> idx;
    for (std::size_t k = 0; k < space.total_dim(); ++k) {
        if (space.occupation(k)[slot] == level) idx.push_back(static_cast<Eigen::Index>(k));
    }
    return idx;
}

inline Matrix take(const Matrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
        }
    }
    return out;
}

/// |g><g| (x) rho on the atom-extended space.
inline Matrix attach_ground(const Matrix& rho, const HilbertSpace& full) {
    const auto block = atom_block(full, kLevelG);
    const auto n = static_cast<Eigen::Index>(full.total_dim());
    Matrix out = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < block.size(); ++i) {
        for (std::size_t j = 0; j < block.size(); ++j) {
            out(block[i], block[j]) = rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return out;
}

/// Reduced magnon density matrix, summing the three atomic diagonal blocks.
inline Matrix trace_out_atom(const Matrix& rho, const HilbertSpace& full) {
    Matrix out;
    for (std::size_t level = 0; level < full.dim("atom"); ++level) {
        const auto block = atom_block(full, level);
        Matrix part = take(rho, block, block);
        if (out.size() == 0) {
            out = std::move(part);
        } else {
            out += part;
        }
    }
    return out;
}

inline HilbertSpace with_atom(const HilbertSpace& magnons) {
    std::vector<Subsystem> subs{{"atom", 3}};
    for (const auto& s : magnons.subsystems()) subs.push_back(s);
    return HilbertSpace(std::move(subs));
}

}  // namespace detail

/// Kraus operator <g| exp(-i H tau) |g> on the space without the atom.
inline Operator numeric_kraus(const Operator& H_eff, double tau) {
    const HilbertSpace& space = H_eff.space();
    if (space.dim("atom") != 3) fail(ErrorKind::InvalidDimension, "atom subsystem must have dimension 3");
    const Operator u = propagator(H_eff, tau);
    const auto block = detail::atom_block(space, kLevelG);
    return {space.without("atom"), detail::take(u.matrix(), block, block)};
}

struct ProjectionOutcome {
    QuantumState state;
    double probability = 0.0;
};

/// Projects the atom onto |g>, returning the renormalized remainder.
inline ProjectionOutcome apply_projection(const QuantumState& total) {
    const HilbertSpace& space = total.space();
    const HilbertSpace rest = space.without("atom");
    const auto block = detail::atom_block(space, kLevelG);
    if (total.is_pure()) {
        Vector v(static_cast<Eigen::Index>(block.size()));
        for (std::size_t i = 0; i < block.size(); ++i) v(static_cast<Eigen::Index>(i)) = total.vector()(block[i]);
        const double p = v.squaredNorm();
        if (p < kNullOutcomeThreshold) fail(ErrorKind::NullOutcome, "ground-state outcome has probability " + std::to_string(p));
        return {QuantumState::pure(rest, v / std::sqrt(p)), p};
    }
    Matrix rho = detail::take(total.density(), block, block);
    const double p = rho.trace().real();
    if (p < kNullOutcomeThreshold) fail(ErrorKind::NullOutcome, "ground-state outcome has probability " + std::to_string(p));
    rho /= p;
    rho = 0.5 * (rho + rho.adjoint());
    return {QuantumState::mixed(rest, std::move(rho), 1e-8), p};
}

/// (|00> + sign |NN>) / sqrt(2) on [n, m].
inline QuantumState bell_state(const HilbertSpace& space, std::size_t N, int sign = +1) {
    if (N >= space.dim("n") || N >= space.dim("m")) {
        fail(ErrorKind::InvalidDimension, "Bell level N=" + std::to_string(N) + " exceeds the magnon cutoff");
    }
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(space.total_dim()));
    std::vector<std::size_t> zero(space.size(), 0);
    std::vector<std::size_t> high(space.size(), 0);
    high[space.slot("n")] = N;
    high[space.slot("m")] = N;
    psi(static_cast<Eigen::Index>(space.index(zero))) = 1.0 / std::numbers::sqrt2;
    psi(static_cast<Eigen::Index>(space.index(high))) += static_cast<double>(sign) / std::numbers::sqrt2;
    return QuantumState::pure(space, psi);
}

/// ((|0> + |1>)/sqrt(2)) (x) ((|0> + |1>)/sqrt(2)) on [n:d, m:d].
inline QuantumState superposed_state(std::size_t d) {
    Vector one = Vector::Zero(static_cast<Eigen::Index>(d));
    one(0) = 1.0;
    one(1) = 1.0;
    return product_state(magnon_space(d), {one, one});
}

inline QuantumState coherent_pair(cplx beta_n, cplx beta_m, std::size_t d,
                                  double leakage_tolerance = kDefaultLeakageTolerance) {
    const QuantumState cn = coherent_state(beta_n, d, leakage_tolerance);
    const QuantumState cm = coherent_state(beta_m, d, leakage_tolerance);
    return product_state(magnon_space(d), {cn.vector(), cm.vector()});
}

/// Common detuning of the effective model; the closed-form Kraus
/// coefficients only hold when both tilde detunings agree.
inline double common_detuning(const EffectiveParams& eff) {
    const double scale = std::max({1e-300, std::abs(eff.Delta_e_tilde), std::abs(eff.Delta_f_tilde)});
    if (std::abs(eff.Delta_e_tilde - eff.Delta_f_tilde) > 1e-12 * scale) {
        fail(ErrorKind::InvalidArgument, "effective detunings differ; no common Delta");
    }
    return eff.Delta_e_tilde;
}

/// tau = 2 pi / Omega_NN, which makes |alpha_NN(tau)| = 1.
inline double interval_for_target(std::size_t N, const EffectiveParams& eff, double Delta) {
    if (N < 1) fail(ErrorKind::InvalidArgument, "target excitation N must be >= 1");
    return 2.0 * std::numbers::pi / rabi_frequency(N, N, eff, Delta);
}

enum class IntervalMode { Full, Half };

struct Decoherence {
    double gamma_n = 0.0;
    double gamma_m = 0.0;
};

struct ProtocolConfig {
    EffectiveParams eff;
    std::optional<double> tau;  // defaults to interval_for_target, halved in Half mode
    std::size_t rounds = 1;
    std::size_t target_N = 1;
    std::optional<Decoherence> decoherence;
    IntervalMode interval_mode = IntervalMode::Full;
    std::size_t steps_per_interval = 2000;  // master-equation dt = tau / steps
    double trace_tol = 1e-8;

    double interval() const {
        double t = tau ? *tau : interval_for_target(target_N, eff, common_detuning(eff));
        if (!tau && interval_mode == IntervalMode::Half) t *= 0.5;
        if (!(t > 0.0)) fail(ErrorKind::InvalidArgument, "measurement interval must be positive");
        return t;
    }

    void validate() const {
        if (rounds < 1) fail(ErrorKind::InvalidArgument, "rounds must be >= 1");
        if (target_N < 1) fail(ErrorKind::InvalidArgument, "target_N must be >= 1");
        if (steps_per_interval < 1) fail(ErrorKind::InvalidArgument, "steps_per_interval must be >= 1");
        if (decoherence && (decoherence->gamma_n < 0.0 || decoherence->gamma_m < 0.0)) {
            fail(ErrorKind::InvalidArgument, "decay rates must be >= 0");
        }
        (void)interval();
    }
};

struct RoundRecord {
    std::size_t round = 0;
    double time = 0.0;
    double fidelity_plus = 0.0;
    double fidelity_minus = 0.0;
    double success_probability = 1.0;  // cumulative
    double even_population = 0.0;      // P_00 + P_NN
    double round_probability = 1.0;
};

struct ProtocolRecord {
    double tau = 0.0;
    IntervalMode interval_mode = IntervalMode::Full;
    std::vector<RoundRecord> rounds;  // rounds[0] is the initial state
    QuantumState final_state;
    std::optional<std::size_t> distilled_round;
    // Populated non-target basis states (n, m) whose per-round damping
    // |alpha|^2 exceeds 1 - 1e-6 (closed dynamics only).
    std::vector<std::pair<std::size_t, std::size_t>> stalled_states;

    /// Phi^- for odd rounds of a half-interval run, Phi^+ otherwise.
    double target_fidelity(std::size_t round) const {
        const RoundRecord& r = rounds.at(round);
        return (interval_mode == IntervalMode::Half && round % 2 == 1) ? r.fidelity_minus : r.fidelity_plus;
    }
};

namespace detail {

inline void require_magnon_space(const HilbertSpace& space) {
    if (space.size() != 2 || !space.contains("n") || !space.contains("m")) {
        fail(ErrorKind::InvalidArgument, "expected a magnon state on [n, m]");
    }
}

struct TargetIndices {
    Eigen::Index vacuum;
    Eigen::Index excited;
};

inline TargetIndices target_indices(const HilbertSpace& space, std::size_t N) {
    std::vector<std::size_t> zero(2, 0);
    std::vector<std::size_t> high(2, 0);
    high[space.slot("n")] = N;
    high[space.slot("m")] = N;
    return {static_cast<Eigen::Index>(space.index(zero)), static_cast<Eigen::Index>(space.index(high))};
}

inline LindbladSpec magnon_loss_spec(const Operator& H, const Decoherence& dec) {
    const HilbertSpace& space = H.space();
    return {H,
            {{embed(annihilation(space.dim("n")), space, "n"), dec.gamma_n},
             {embed(annihilation(space.dim("m")), space, "m"), dec.gamma_m}}};
}

}  // namespace detail

/// Repeated evolve-and-project rounds with the ancilla reset to |g> each time.
inline ProtocolRecord run_protocol(const QuantumState& initial, const ProtocolConfig& cfg) {
    cfg.validate();
    const HilbertSpace& magnons = initial.space();
    detail::require_magnon_space(magnons);
    const HilbertSpace full = detail::with_atom(magnons);
    const double tau = cfg.interval();
    const std::size_t N = cfg.target_N;
    const QuantumState plus = bell_state(magnons, N, +1);
    const QuantumState minus = bell_state(magnons, N, -1);
    const auto target = detail::target_indices(magnons, N);

    Matrix rho = initial.density();
    const auto even = [&](const Matrix& r) { return (r(target.vacuum, target.vacuum) + r(target.excited, target.excited)).real(); };
    if (even(rho) < kNullOutcomeThreshold) {
        fail(ErrorKind::ZeroTargetOverlap, "initial state has no population on |00> or |NN> for N=" + std::to_string(N));
    }

    ProtocolRecord rec{tau, cfg.interval_mode, {}, initial.to_mixed(), std::nullopt, {}};
    const auto log_round = [&](std::size_t round, double p_round, double p_total) {
        const auto overlap = [&](const QuantumState& t) {
            return std::clamp(t.vector().dot(rho * t.vector()).real(), 0.0, 1.0);
        };
        rec.rounds.push_back({round, tau * static_cast<double>(round), overlap(plus), overlap(minus), p_total,
                              even(rho), p_round});
        if (!rec.distilled_round && rec.rounds.back().even_population >= kDistilledThreshold) rec.distilled_round = round;
    };
    log_round(0, 1.0, 1.0);

    const Operator H = build_jc_effective(cfg.eff, full);
    double success = 1.0;
    const auto renormalize = [&](std::size_t round) {
        const double p = rho.trace().real();
        if (p < kNullOutcomeThreshold) {
            fail(ErrorKind::NullOutcome, "round " + std::to_string(round) + " ground-state probability " + std::to_string(p));
        }
        rho /= p;
        rho = 0.5 * (rho + rho.adjoint());
        success *= p;
        log_round(round, p, success);
    };

    if (!cfg.decoherence) {
        // Closed dynamics: attaching |g>, evolving and projecting is exactly V rho V^dag.
        const Matrix v = numeric_kraus(H, tau).matrix();
        const Eigen::VectorXd pop0 = initial.populations();
        for (Eigen::Index k = 0; k < v.rows(); ++k) {
            if (k == target.vacuum || k == target.excited || pop0(k) <= 0.0) continue;
            if (std::norm(v(k, k)) > kStallThreshold) {
                const auto occ = magnons.occupation(static_cast<std::size_t>(k));
                rec.stalled_states.emplace_back(occ[magnons.slot("n")], occ[magnons.slot("m")]);
            }
        }
        for (std::size_t r = 1; r <= cfg.rounds; ++r) {
            rho = v * rho * v.adjoint();
            renormalize(r);
        }
    } else {
        const LindbladGenerator gen(detail::magnon_loss_spec(H, *cfg.decoherence));
        const IntegratorConfig icfg{tau / static_cast<double>(cfg.steps_per_interval), cfg.trace_tol};
        const auto ground = detail::atom_block(full, kLevelG);
        for (std::size_t r = 1; r <= cfg.rounds; ++r) {
            const Matrix evolved = integrate_master(detail::attach_ground(rho, full), gen, tau, icfg);
            rho = detail::take(evolved, ground, ground);
            renormalize(r);
        }
    }
    rec.final_state = QuantumState::mixed(magnons, rho, 1e-8);
    return rec;
}

struct StabilizationRecord {
    double tau = 0.0;
    std::vector<double> times;
    std::vector<double> fidelity_stab;
    std::vector<double> fidelity_free;
    std::vector<double> success_probability;
};

/// Evolve-and-project rounds from a prepared Bell state, next to a
/// measurement-free master-equation run over the same horizon.
inline StabilizationRecord stabilize(const QuantumState& bell, const ProtocolConfig& cfg) {
    if (!cfg.decoherence) fail(ErrorKind::InvalidArgument, "stabilize requires decoherence rates");
    const ProtocolRecord stab = run_protocol(bell, cfg);

    const HilbertSpace& magnons = bell.space();
    const HilbertSpace full = detail::with_atom(magnons);
    const QuantumState target = bell_state(magnons, cfg.target_N, +1);
    const LindbladGenerator gen(detail::magnon_loss_spec(build_jc_effective(cfg.eff, full), *cfg.decoherence));
    const IntegratorConfig icfg{stab.tau / static_cast<double>(cfg.steps_per_interval), cfg.trace_tol};

    StabilizationRecord out;
    out.tau = stab.tau;
    Matrix rho = detail::attach_ground(bell.density(), full);
    for (std::size_t r = 0; r <= cfg.rounds; ++r) {
        if (r > 0) rho = integrate_master(rho, gen, stab.tau, icfg);
        Matrix reduced = detail::trace_out_atom(rho, full);
        reduced = 0.5 * (reduced + reduced.adjoint());
        out.times.push_back(stab.tau * static_cast<double>(r));
        out.fidelity_stab.push_back(stab.rounds[r].fidelity_plus);
        out.fidelity_free.push_back(fidelity(QuantumState::mixed(magnons, reduced, 1e-7), target));
        out.success_probability.push_back(stab.rounds[r].success_probability);
    }
    return out;
}

/// Single-round Bell fidelity 2 / (2 + alpha_01^2 + alpha_10^2) at
/// tau = 2 pi / sqrt(G_e^2 + G_f^2) with xi = G_f / G_e; the approximate
/// branch uses the coefficients linearized around xi = 1.
inline double coupling_ratio_fidelity(double xi, bool approximate) {
    if (!(xi > 0.0)) fail(ErrorKind::InvalidArgument, "coupling ratio must be positive");
    const double pi = std::numbers::pi;
    double a01 = 0.0;
    double a10 = 0.0;
    if (approximate) {
        const double c = std::cos(std::numbers::sqrt2 * pi);
        const double s = std::sin(std::numbers::sqrt2 * pi);
        const double slope = pi / std::numbers::sqrt2 * s;
        a01 = c - slope * (xi - 1.0);
        a10 = c + slope * (xi - 1.0);
    } else {
        const double norm = std::sqrt(1.0 + xi * xi);
        a01 = std::cos(2.0 * pi * xi / norm);
        a10 = std::cos(2.0 * pi / norm);
    }
    return 2.0 / (2.0 + a01 * a01 + a10 * a10);
}

/// Applies |00><00| + |11><11| to a two-qubit pure state.
inline ProjectionOutcome qubit_parity_reference(const QuantumState& state) {
    const HilbertSpace& space = state.space();
    if (space.size() != 2 || space.subsystems()[0].dim != 2 || space.subsystems()[1].dim != 2) {
        fail(ErrorKind::InvalidArgument, "qubit parity reference expects two qubits");
    }
    Vector v = state.vector();
    v(1) = 0.0;
    v(2) = 0.0;
    const double p = v.squaredNorm();
    if (p < kNullOutcomeThreshold) fail(ErrorKind::NullOutcome, "parity projection annihilates the state");
    return {QuantumState::pure(space, v / std::sqrt(p)), p};
}

}  // namespace magbell
