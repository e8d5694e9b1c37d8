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

#include <string>

namespace magbell {

/// Two-cavity parameters with every transition resonant with its magnon and
/// both cavities detuned by Delta below: the effective model then has
/// G_e = G_f = g^2 / Delta and no residual detuning.
inline ModelParams symmetric_dispersive_params(double g, double Delta) {
    if (Delta == 0.0) fail(ErrorKind::ZeroDetuning, "cavity detuning is zero");
    ModelParams p;
    p.omega_m = 1.0;
    p.omega_n = 1.0;
    p.omega_e = 1.0;
    p.omega_f = 1.0;
    p.omega_a = 1.0 - Delta;
    p.omega_b = 1.0 - Delta;
    p.g_n = p.g_m = p.g_e = p.g_f = g;
    return p;
}

struct DispersiveValidation {
    double ratio = 0.0;  // max |g/Delta|
    EffectiveParams eff;
    double tau = 0.0;
    SwResidual residual;
    double evolution_fidelity = 0.0;
};

/// Evolves |g, 0_a, 0_b> (x) the superposed magnon state for one tau_0 under
/// the full two-cavity model and under the effective JC model, and compares
/// them after undoing the free rotation of the dressed frequencies.
inline DispersiveValidation validate_dispersive(const ModelParams& p, std::size_t cavity_cutoff,
                                                std::size_t magnon_cutoff) {
    DispersiveValidation out;
    out.ratio = p.dispersive_ratio();
    if (out.ratio > kDispersiveLimit) {
        fail(ErrorKind::RegimeViolation, "max |g/Delta| = " + std::to_string(out.ratio) + " exceeds " +
                                             std::to_string(kDispersiveLimit));
    }
    const HilbertSpace full = two_cavity_space(cavity_cutoff, magnon_cutoff);
    const HilbertSpace jc = jc_space(magnon_cutoff);
    out.eff = effective_couplings(p);
    out.residual = sw_reduction_check(p, full);
    out.tau = interval_for_target(1, out.eff, common_detuning(out.eff));

    const QuantumState magnons = superposed_state(magnon_cutoff);
    Vector psi_full = Vector::Zero(static_cast<Eigen::Index>(full.total_dim()));
    Vector psi_jc = Vector::Zero(static_cast<Eigen::Index>(jc.total_dim()));
    for (std::size_t n = 0; n < magnon_cutoff; ++n) {
        for (std::size_t m = 0; m < magnon_cutoff; ++m) {
            const cplx c = magnons.vector()(static_cast<Eigen::Index>(magnons.space().index({n, m})));
            psi_full(static_cast<Eigen::Index>(full.index({kLevelG, 0, 0, n, m}))) = c;
            psi_jc(static_cast<Eigen::Index>(jc.index({kLevelG, n, m}))) = c;
        }
    }

    psi_full = propagator(build_full_two_cavity(p, full), out.tau).matrix() * psi_full;
    psi_jc = propagator(build_jc_effective(out.eff, jc), out.tau).matrix() * psi_jc;

    // Only the cavity vacuum is compared, so the cavity rotation drops out; the
    // n (m) frame also carries |e> (|f>).
    const double wn = p.omega_n + out.eff.chi_n;
    const double wm = p.omega_m + out.eff.chi_m;
    cplx overlap = 0.0;
    for (std::size_t k = 0; k < full.total_dim(); ++k) {
        const auto occ = full.occupation(k);
        if (occ[1] != 0 || occ[2] != 0) continue;
        const double ne = static_cast<double>(occ[3]) + (occ[0] == kLevelE ? 1.0 : 0.0);
        const double nf = static_cast<double>(occ[4]) + (occ[0] == kLevelF ? 1.0 : 0.0);
        const double phase = (wn * ne + wm * nf) * out.tau;
        const cplx rotated = std::exp(kI * phase) * psi_full(static_cast<Eigen::Index>(k));
        overlap += std::conj(psi_jc(static_cast<Eigen::Index>(jc.index({occ[0], occ[3], occ[4]})))) * rotated;
    }
    out.evolution_fidelity = std::norm(overlap);
    return out;
}

}  // namespace magbell
