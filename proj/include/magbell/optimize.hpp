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
#include "magbell/measurement.hpp"
#include "magbell/model.hpp"
#include "magbell/nelder_mead.hpp"
#include "magbell/pulse.hpp"

#include <cstdint>
#include <future>
#include <random>
#include <vector>

namespace magbell {

struct OptimizerConfig {
    std::size_t n_omega = 4;
    SimplexConfig simplex{1500, 1e-6, 1e-12, 0.5};
    std::size_t restarts = 8;
    std::uint64_t seed = 2024;
    std::size_t slices = 512;
    // Initial coefficients are drawn from [-init_scale, init_scale] / tau^2,
    // which keeps the envelope within +-(1 + 2 n_omega init_scale / 4) G.
    double init_scale = 2.0;
    bool parallel = true;

    void validate() const {
        simplex.validate();
        if (restarts < 1) fail(ErrorKind::InvalidArgument, "restarts must be >= 1");
        if (slices < 1) fail(ErrorKind::InvalidArgument, "slices must be >= 1");
        if (!(init_scale >= 0.0)) fail(ErrorKind::InvalidArgument, "init_scale must be >= 0");
    }
};

struct SingleShotOutcome {
    double fidelity = 0.0;
    double success_probability = 0.0;
};

struct OptimizationResult {
    PulseCoefficients pulse;
    double fidelity = 0.0;
    double success_probability = 0.0;
    double baseline_fidelity = 0.0;  // zero coefficients, Delta = G throughout
    std::vector<double> trace_times;
    std::vector<double> trace_fidelity;
    std::size_t iterations = 0;
    std::size_t best_restart = 0;  // restarts.size() when the baseline won
    std::uint64_t seed = 0;
};

namespace detail {

// The single-excitation initial state never leaves n, m <= 1 under the JC
// dynamics, so cutoff 2 is exact for the single-shot problem.
inline constexpr std::size_t kSingleShotCutoff = 2;

inline Vector single_shot_initial() {
    const HilbertSpace full = jc_space(kSingleShotCutoff);
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(full.total_dim()));
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t m = 0; m < 2; ++m) psi(static_cast<Eigen::Index>(full.index({kLevelG, n, m}))) = 0.5;
    }
    return psi;
}

inline SingleShotOutcome project_onto_bell(const Vector& psi) {
    const HilbertSpace full = jc_space(kSingleShotCutoff);
    const ProjectionOutcome out = apply_projection(QuantumState::pure(full, psi, 1e-9));
    return {fidelity(out.state, bell_state(full.without("atom"), 1, +1)), out.probability};
}

}  // namespace detail

/// One evolve-and-project shot from the superposed state under the CRAB
/// detuning; `G` is the magnon-atom coupling.
inline SingleShotOutcome evaluate_single_shot(const PulseCoefficients& pulse, double G, std::size_t slices) {
    const HilbertSpace full = jc_space(detail::kSingleShotCutoff);
    const Operator u = time_ordered_propagator(build_time_dependent_jc(pulse, G, full), pulse.tau_total, slices);
    return detail::project_onto_bell(u.matrix() * detail::single_shot_initial());
}

/// Bell fidelity of the projected state at every slice boundary.
inline std::vector<double> single_shot_trace(const PulseCoefficients& pulse, double G, std::size_t slices) {
    const HilbertSpace full = jc_space(detail::kSingleShotCutoff);
    const auto hamiltonian = build_time_dependent_jc(pulse, G, full);
    const double h = pulse.tau_total / static_cast<double>(slices);
    Vector psi = detail::single_shot_initial();
    std::vector<double> trace{detail::project_onto_bell(psi).fidelity};
    for (std::size_t k = 0; k < slices; ++k) {
        psi = exp_minus_i(hamiltonian((static_cast<double>(k) + 0.5) * h).matrix(), h) * psi;
        trace.push_back(detail::project_onto_bell(psi).fidelity);
    }
    return trace;
}

/// CRAB search over 2 n_omega detuning coefficients maximizing the
/// single-shot Bell fidelity. Restarts are seeded seed, seed+1, ...; the
/// best fidelity wins with the lowest restart index as tie-break.
inline OptimizationResult optimize_single_shot(const EffectiveParams& eff, const OptimizerConfig& cfg) {
    cfg.validate();
    if (eff.G_e != eff.G_f || !(eff.G_e > 0.0)) {
        fail(ErrorKind::InvalidArgument, "single-shot search needs G_e == G_f > 0");
    }
    const double G = eff.G_e;
    const double tau = interval_for_target(1, eff, 0.0);
    const double scale = 1.0 / (tau * tau);
    const std::size_t nw = cfg.n_omega;

    const auto pulse_from = [&](const std::vector<double>& u) {
        PulseCoefficients p{std::vector<double>(nw), std::vector<double>(nw), tau, G};
        for (std::size_t k = 0; k < nw; ++k) {
            p.a[k] = u[k] * scale;
            p.b[k] = u[nw + k] * scale;
        }
        return p;
    };
    const auto infidelity = [&](const std::vector<double>& u) {
        return 1.0 - evaluate_single_shot(pulse_from(u), G, cfg.slices).fidelity;
    };

    const auto run_restart = [&](std::size_t r) {
        std::mt19937_64 rng(cfg.seed + r);
        std::uniform_real_distribution<double> dist(-cfg.init_scale, cfg.init_scale);
        std::vector<double> x0(2 * nw);
        for (auto& v : x0) v = dist(rng);
        return nelder_mead(infidelity, x0, cfg.simplex);
    };

    std::vector<SimplexResult> runs;
    if (cfg.parallel && cfg.restarts > 1) {
        std::vector<std::future<SimplexResult>> jobs;
        for (std::size_t r = 0; r < cfg.restarts; ++r) jobs.push_back(std::async(std::launch::async, run_restart, r));
        for (auto& j : jobs) runs.push_back(j.get());
    } else {
        for (std::size_t r = 0; r < cfg.restarts; ++r) runs.push_back(run_restart(r));
    }

    OptimizationResult out;
    const std::vector<double> zero(2 * nw, 0.0);
    const SingleShotOutcome base = evaluate_single_shot(pulse_from(zero), G, cfg.slices);
    out.baseline_fidelity = base.fidelity;

    std::vector<double> best_x = zero;
    double best_f = 1.0 - base.fidelity;
    out.best_restart = cfg.restarts;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        out.iterations += runs[r].iterations;
        if (runs[r].f < best_f) {
            best_f = runs[r].f;
            best_x = runs[r].x;
            out.best_restart = r;
        }
    }
    out.seed = cfg.seed + (out.best_restart < cfg.restarts ? out.best_restart : 0);
    out.pulse = pulse_from(best_x);
    const SingleShotOutcome achieved = evaluate_single_shot(out.pulse, G, cfg.slices);
    out.fidelity = achieved.fidelity;
    out.success_probability = achieved.success_probability;
    out.trace_fidelity = single_shot_trace(out.pulse, G, cfg.slices);
    for (std::size_t k = 0; k <= cfg.slices; ++k) {
        out.trace_times.push_back(tau * static_cast<double>(k) / static_cast<double>(cfg.slices));
    }
    return out;
}

}  // namespace magbell
