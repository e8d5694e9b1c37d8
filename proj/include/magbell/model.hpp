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
#include "magbell/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace magbell {

// Atomic levels of the V-type ancilla.
inline constexpr std::size_t kLevelG = 0;
inline constexpr std::size_t kLevelE = 1;
inline constexpr std::size_t kLevelF = 2;

inline constexpr double kDispersiveLimit = 0.1;

// Two-cavity model: magnon n and transition g-e couple to cavity a, magnon m
// and transition g-f couple to cavity b. All values in units of omega_m.
struct ModelParams {
    double omega_a = 0.0;
    double omega_b = 0.0;
    double omega_n = 0.0;
    double omega_m = 1.0;
    double omega_e = 0.0;
    double omega_f = 0.0;
    double g_n = 0.0;
    double g_m = 0.0;
    double g_e = 0.0;
    double g_f = 0.0;
    double gamma_n = 0.0;
    double gamma_m = 0.0;

    double Delta_n() const { return omega_n - omega_a; }
    double Delta_m() const { return omega_m - omega_b; }
    double Delta_e() const { return omega_e - omega_a; }
    double Delta_f() const { return omega_f - omega_b; }

    void validate() const {
        if (g_n < 0 || g_m < 0 || g_e < 0 || g_f < 0) fail(ErrorKind::InvalidArgument, "couplings must be >= 0");
        if (gamma_n < 0 || gamma_m < 0) fail(ErrorKind::InvalidArgument, "decay rates must be >= 0");
    }

    /// max |g_i / Delta_i| over the four coupled pairs.
    double dispersive_ratio() const {
        return std::max({std::abs(g_n / Delta_n()), std::abs(g_m / Delta_m()), std::abs(g_e / Delta_e()),
                         std::abs(g_f / Delta_f())});
    }
};

// Single shared cavity a; every detuning is measured from omega_a.
struct SingleCavityParams {
    double omega_a = 0.0;
    double omega_n = 0.0;
    double omega_m = 1.0;
    double omega_e = 0.0;
    double omega_f = 0.0;
    double lambda_n = 0.0;
    double lambda_m = 0.0;
    double lambda_e = 0.0;
    double lambda_f = 0.0;

    double Delta_n() const { return omega_n - omega_a; }
    double Delta_m() const { return omega_m - omega_a; }
    double Delta_e() const { return omega_e - omega_a; }
    double Delta_f() const { return omega_f - omega_a; }

    void validate() const {
        if (lambda_n < 0 || lambda_m < 0 || lambda_e < 0 || lambda_f < 0) {
            fail(ErrorKind::InvalidArgument, "couplings must be >= 0");
        }
    }

    double dispersive_ratio() const {
        return std::max({std::abs(lambda_n / Delta_n()), std::abs(lambda_m / Delta_m()),
                         std::abs(lambda_e / Delta_e()), std::abs(lambda_f / Delta_f())});
    }
};

struct LambShifts {
    double chi_n = 0.0;
    double chi_m = 0.0;
    double chi_e = 0.0;
    double chi_f = 0.0;
};

struct EffectiveParams {
    double G_e = 0.0;
    double G_f = 0.0;
    double Delta_e_tilde = 0.0;
    double Delta_f_tilde = 0.0;
    double chi_n = 0.0;
    double chi_m = 0.0;
    double chi_e = 0.0;
    double chi_f = 0.0;
    std::vector<std::string> warnings;

    /// Effective model specified directly, with a common detuning.
    static EffectiveParams resonant(double G_e, double G_f, double Delta = 0.0) {
        EffectiveParams p;
        p.G_e = G_e;
        p.G_f = G_f;
        p.Delta_e_tilde = Delta;
        p.Delta_f_tilde = Delta;
        return p;
    }
};

namespace detail {

inline double checked_ratio(double num, double detuning, const char* name) {
    if (detuning == 0.0) fail(ErrorKind::ZeroDetuning, std::string("detuning ") + name + " is zero");
    return num / detuning;
}

inline void check_dispersive(double ratio, std::vector<std::string>& warnings) {
    if (ratio > kDispersiveLimit) {
        warnings.push_back("dispersive regime violated: max |g/Delta| = " + std::to_string(ratio) + " > " +
                           std::to_string(kDispersiveLimit));
    }
}

inline Operator atom_op(const HilbertSpace& space, std::size_t row, std::size_t col) {
    return embed(transition(3, row, col), space, "atom");
}

inline Operator lower(const HilbertSpace& space, const std::string& label) {
    return embed(annihilation(space.dim(label)), space, label);
}

inline Operator number(const HilbertSpace& space, const std::string& label) {
    return embed(number_operator(space.dim(label)), space, label);
}

inline void check_atom(const HilbertSpace& space) {
    if (space.dim("atom") != 3) fail(ErrorKind::InvalidDimension, "atom subsystem must have dimension 3 (g, e, f)");
}

inline void check_modes(const HilbertSpace& space, std::initializer_list<const char*> labels) {
    for (const char* l : labels) {
        if (space.dim(l) < 2) fail(ErrorKind::InvalidDimension, std::string("mode '") + l + "' needs cutoff >= 2");
    }
}

}  // namespace detail

/// Induced exchange coupling (l_i l_j / 2)(1/D_i + 1/D_j).
inline double induced_coupling(double l_i, double l_j, double D_i, double D_j) {
    return 0.5 * l_i * l_j * (detail::checked_ratio(1.0, D_i, "i") + detail::checked_ratio(1.0, D_j, "j"));
}

inline LambShifts lamb_shifts(const ModelParams& p) {
    return {detail::checked_ratio(p.g_n * p.g_n, p.Delta_n(), "Delta_n"),
            detail::checked_ratio(p.g_m * p.g_m, p.Delta_m(), "Delta_m"),
            detail::checked_ratio(p.g_e * p.g_e, p.Delta_e(), "Delta_e"),
            detail::checked_ratio(p.g_f * p.g_f, p.Delta_f(), "Delta_f")};
}

inline LambShifts lamb_shifts(const SingleCavityParams& p) {
    return {detail::checked_ratio(p.lambda_n * p.lambda_n, p.Delta_n(), "Delta_n"),
            detail::checked_ratio(p.lambda_m * p.lambda_m, p.Delta_m(), "Delta_m"),
            detail::checked_ratio(p.lambda_e * p.lambda_e, p.Delta_e(), "Delta_e"),
            detail::checked_ratio(p.lambda_f * p.lambda_f, p.Delta_f(), "Delta_f")};
}

/// Second-order couplings and shifted detunings of the two-cavity model.
/// A regime violation is reported through `warnings`, not thrown.
inline EffectiveParams effective_couplings(const ModelParams& p) {
    p.validate();
    const LambShifts chi = lamb_shifts(p);
    EffectiveParams eff;
    eff.G_e = induced_coupling(p.g_e, p.g_n, p.Delta_e(), p.Delta_n());
    eff.G_f = induced_coupling(p.g_m, p.g_f, p.Delta_m(), p.Delta_f());
    eff.chi_n = chi.chi_n;
    eff.chi_m = chi.chi_m;
    eff.chi_e = chi.chi_e;
    eff.chi_f = chi.chi_f;
    eff.Delta_e_tilde = (p.omega_e + chi.chi_e) - (p.omega_n + chi.chi_n);
    eff.Delta_f_tilde = (p.omega_f + chi.chi_f) - (p.omega_m + chi.chi_m);
    detail::check_dispersive(p.dispersive_ratio(), eff.warnings);
    return eff;
}

/// Effective parameters of the shared-cavity model, keeping only the
/// n<->e and m<->f exchanges that survive the detuning-match condition.
inline EffectiveParams single_mode_effective_couplings(const SingleCavityParams& p) {
    p.validate();
    const LambShifts chi = lamb_shifts(p);
    EffectiveParams eff;
    eff.G_e = induced_coupling(p.lambda_n, p.lambda_e, p.Delta_n(), p.Delta_e());
    eff.G_f = induced_coupling(p.lambda_m, p.lambda_f, p.Delta_m(), p.Delta_f());
    eff.chi_n = chi.chi_n;
    eff.chi_m = chi.chi_m;
    eff.chi_e = chi.chi_e;
    eff.chi_f = chi.chi_f;
    eff.Delta_e_tilde = (p.omega_e + chi.chi_e) - (p.omega_n + chi.chi_n);
    eff.Delta_f_tilde = (p.omega_f + chi.chi_f) - (p.omega_m + chi.chi_m);
    detail::check_dispersive(p.dispersive_ratio(), eff.warnings);
    return eff;
}

inline HilbertSpace magnon_space(std::size_t d) { return HilbertSpace{{"n", d}, {"m", d}}; }
inline HilbertSpace jc_space(std::size_t d) { return HilbertSpace{{"atom", 3}, {"n", d}, {"m", d}}; }
inline HilbertSpace two_cavity_space(std::size_t c, std::size_t d) {
    return HilbertSpace{{"atom", 3}, {"a", c}, {"b", c}, {"n", d}, {"m", d}};
}
inline HilbertSpace single_cavity_space(std::size_t c, std::size_t d) {
    return HilbertSpace{{"atom", 3}, {"a", c}, {"n", d}, {"m", d}};
}

/// JC-like effective Hamiltonian in the rotating frame:
/// De|e><e| + Df|f><f| + Ge(n s+_eg + h.c.) + Gf(m s+_fg + h.c.).
inline Operator build_jc_effective(const EffectiveParams& eff, const HilbertSpace& space) {
    detail::check_atom(space);
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const Operator ce = n * sp_e;
    const Operator cf = m * sp_f;
    return eff.Delta_e_tilde * detail::atom_op(space, kLevelE, kLevelE) +
           eff.Delta_f_tilde * detail::atom_op(space, kLevelF, kLevelF) + eff.G_e * (ce + ce.adjoint()) +
           eff.G_f * (cf + cf.adjoint());
}

/// N_e = n^dag n + |e><e| and N_f = m^dag m + |f><f|, conserved by the JC model.
inline std::pair<Operator, Operator> jc_excitation_numbers(const HilbertSpace& space) {
    return {detail::number(space, "n") + detail::atom_op(space, kLevelE, kLevelE),
            detail::number(space, "m") + detail::atom_op(space, kLevelF, kLevelF)};
}

inline Operator total_excitation(const HilbertSpace& space) {
    Operator total = detail::atom_op(space, kLevelE, kLevelE) + detail::atom_op(space, kLevelF, kLevelF);
    for (const auto& s : space.subsystems()) {
        if (s.label != "atom") total = total + detail::number(space, s.label);
    }
    return total;
}

/// Bare two-cavity Hamiltonian: free terms plus the four exchange couplings.
inline Operator build_full_two_cavity(const ModelParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    detail::check_modes(space, {"a", "b", "n", "m"});
    const Operator a = detail::lower(space, "a");
    const Operator b = detail::lower(space, "b");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const auto xch = [](const Operator& x) { return x + x.adjoint(); };
    return p.omega_a * detail::number(space, "a") + p.omega_b * detail::number(space, "b") +
           p.omega_n * detail::number(space, "n") + p.omega_m * detail::number(space, "m") +
           p.omega_e * detail::atom_op(space, kLevelE, kLevelE) + p.omega_f * detail::atom_op(space, kLevelF, kLevelF) +
           p.g_n * xch(a.adjoint() * n) + p.g_e * xch(a.adjoint() * sp_e.adjoint()) + p.g_m * xch(b.adjoint() * m) +
           p.g_f * xch(b.adjoint() * sp_f.adjoint());
}

/// Anti-Hermitian Schrieffer-Wolff generator removing the first-order exchanges.
inline Operator sw_generator(const ModelParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    const Operator a = detail::lower(space, "a");
    const Operator b = detail::lower(space, "b");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const auto gen = [](const Operator& x) { return x - x.adjoint(); };
    return detail::checked_ratio(p.g_n, p.Delta_n(), "Delta_n") * gen(a * n.adjoint()) +
           detail::checked_ratio(p.g_m, p.Delta_m(), "Delta_m") * gen(b * m.adjoint()) +
           detail::checked_ratio(p.g_e, p.Delta_e(), "Delta_e") * gen(a * sp_e) +
           detail::checked_ratio(p.g_f, p.Delta_f(), "Delta_f") * gen(b * sp_f);
}

/// Closed-form second-order Hamiltonian, including the cavity-dependent
/// dispersive shifts and the three-body e-f exchange.
inline Operator dispersive_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    const LambShifts chi = lamb_shifts(p);
    const EffectiveParams eff = effective_couplings(p);
    const double G_fe = induced_coupling(p.g_e, p.g_f, p.Delta_e(), p.Delta_f());
    const Operator a = detail::lower(space, "a");
    const Operator b = detail::lower(space, "b");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator na = detail::number(space, "a");
    const Operator nb = detail::number(space, "b");
    const Operator pg = detail::atom_op(space, kLevelG, kLevelG);
    const Operator pe = detail::atom_op(space, kLevelE, kLevelE);
    const Operator pf = detail::atom_op(space, kLevelF, kLevelF);
    const Operator ce = n * detail::atom_op(space, kLevelE, kLevelG);
    const Operator cf = m * detail::atom_op(space, kLevelF, kLevelG);
    const Operator fe = a.adjoint() * b * detail::atom_op(space, kLevelF, kLevelE);
    return (p.omega_a - chi.chi_n) * na + (p.omega_b - chi.chi_m) * nb +
           (p.omega_n + chi.chi_n) * detail::number(space, "n") + (p.omega_m + chi.chi_m) * detail::number(space, "m") +
           (p.omega_e + chi.chi_e) * pe + (p.omega_f + chi.chi_f) * pf + eff.G_e * (ce + ce.adjoint()) +
           eff.G_f * (cf + cf.adjoint()) + chi.chi_e * (na * (pe - pg)) + chi.chi_f * (nb * (pf - pg)) +
           G_fe * (fe + fe.adjoint());
}

inline Operator build_single_mode_full(const SingleCavityParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    detail::check_modes(space, {"a", "n", "m"});
    const Operator a = detail::lower(space, "a");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const auto xch = [](const Operator& x) { return x + x.adjoint(); };
    return p.omega_a * detail::number(space, "a") + p.omega_n * detail::number(space, "n") +
           p.omega_m * detail::number(space, "m") + p.omega_e * detail::atom_op(space, kLevelE, kLevelE) +
           p.omega_f * detail::atom_op(space, kLevelF, kLevelF) + p.lambda_n * xch(a.adjoint() * n) +
           p.lambda_m * xch(a.adjoint() * m) + p.lambda_e * xch(a.adjoint() * sp_e.adjoint()) +
           p.lambda_f * xch(a.adjoint() * sp_f.adjoint());
}

inline Operator sw_generator(const SingleCavityParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    const Operator a = detail::lower(space, "a");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const auto gen = [](const Operator& x) { return x - x.adjoint(); };
    return detail::checked_ratio(p.lambda_n, p.Delta_n(), "Delta_n") * gen(a * n.adjoint()) +
           detail::checked_ratio(p.lambda_m, p.Delta_m(), "Delta_m") * gen(a * m.adjoint()) +
           detail::checked_ratio(p.lambda_e, p.Delta_e(), "Delta_e") * gen(a * sp_e) +
           detail::checked_ratio(p.lambda_f, p.Delta_f(), "Delta_f") * gen(a * sp_f);
}

/// Second-order Hamiltonian of the shared-cavity model with all cross terms.
/// The e-f exchange carries a a^dag = a^dag a + 1, so it survives in the
/// cavity vacuum unless the detuning-match condition zeroes G_fe.
inline Operator dispersive_hamiltonian(const SingleCavityParams& p, const HilbertSpace& space) {
    detail::check_atom(space);
    const LambShifts chi = lamb_shifts(p);
    const double G_ne = induced_coupling(p.lambda_n, p.lambda_e, p.Delta_n(), p.Delta_e());
    const double G_nf = induced_coupling(p.lambda_n, p.lambda_f, p.Delta_n(), p.Delta_f());
    const double G_me = induced_coupling(p.lambda_m, p.lambda_e, p.Delta_m(), p.Delta_e());
    const double G_mf = induced_coupling(p.lambda_m, p.lambda_f, p.Delta_m(), p.Delta_f());
    const double G_nm = induced_coupling(p.lambda_n, p.lambda_m, p.Delta_n(), p.Delta_m());
    const double G_fe = induced_coupling(p.lambda_e, p.lambda_f, p.Delta_e(), p.Delta_f());
    const Operator a = detail::lower(space, "a");
    const Operator n = detail::lower(space, "n");
    const Operator m = detail::lower(space, "m");
    const Operator na = detail::number(space, "a");
    const Operator pg = detail::atom_op(space, kLevelG, kLevelG);
    const Operator pe = detail::atom_op(space, kLevelE, kLevelE);
    const Operator pf = detail::atom_op(space, kLevelF, kLevelF);
    const Operator sp_e = detail::atom_op(space, kLevelE, kLevelG);
    const Operator sp_f = detail::atom_op(space, kLevelF, kLevelG);
    const Operator sx_fe = detail::atom_op(space, kLevelF, kLevelE) + detail::atom_op(space, kLevelE, kLevelF);
    const auto xch = [](const Operator& x) { return x + x.adjoint(); };
    return (p.omega_a - chi.chi_n - chi.chi_m) * na + (p.omega_n + chi.chi_n) * detail::number(space, "n") +
           (p.omega_m + chi.chi_m) * detail::number(space, "m") + (p.omega_e + chi.chi_e) * pe +
           (p.omega_f + chi.chi_f) * pf + G_ne * xch(n * sp_e) + G_nf * xch(n * sp_f) + G_me * xch(m * sp_e) +
           G_mf * xch(m * sp_f) + G_nm * xch(n * m.adjoint()) + G_fe * ((a * a.adjoint()) * sx_fe) +
           na * (chi.chi_e * (pe - pg) + chi.chi_f * (pf - pg));
}

struct SwResidual {
    // max-abs of e^S H e^-S minus the closed form on states with at most two
    // excitations and every mode at least two levels below its cutoff.
    double low_excitation = 0.0;
    // Same, restricted further to the cavity vacuum (the protocol sector).
    double cavity_vacuum = 0.0;
};

namespace detail {

inline SwResidual sw_residual(const Operator& full, const Operator& generator, const Operator& closed_form,
                              const std::vector<std::string>& cavities) {
    const HilbertSpace& space = full.space();
    const Matrix u = exp_anti_hermitian(generator.matrix());
    const Matrix diff = u * full.matrix() * u.adjoint() - closed_form.matrix();

    std::vector<Eigen::Index> low;
    std::vector<Eigen::Index> vac;
    const std::size_t atom = space.slot("atom");
    for (std::size_t k = 0; k < space.total_dim(); ++k) {
        const auto occ = space.occupation(k);
        std::size_t excitations = occ[atom] == kLevelG ? 0 : 1;
        bool interior = true;
        bool vacuum = true;
        for (std::size_t s = 0; s < space.size(); ++s) {
            if (s == atom) continue;
            excitations += occ[s];
            if (occ[s] + 2 > space.subsystems()[s].dim) interior = false;
            if (std::find(cavities.begin(), cavities.end(), space.subsystems()[s].label) != cavities.end() &&
                occ[s] != 0) {
                vacuum = false;
            }
        }
        if (excitations <= 2 && interior) {
            low.push_back(static_cast<Eigen::Index>(k));
            if (vacuum) vac.push_back(static_cast<Eigen::Index>(k));
        }
    }
    const auto restricted = [&](const std::vector<Eigen::Index>& idx) {
        double r = 0.0;
        for (auto i : idx) {
            for (auto j : idx) r = std::max(r, std::abs(diff(i, j)));
        }
        return r;
    };
    return {restricted(low), restricted(vac)};
}

}  // namespace detail

/// Exact e^S H e^-S against the closed-form second-order Hamiltonian.
/// The low-excitation residual scales as (g/Delta)^3.
inline SwResidual sw_reduction_check(const ModelParams& p, const HilbertSpace& space) {
    return detail::sw_residual(build_full_two_cavity(p, space), sw_generator(p, space), dispersive_hamiltonian(p, space),
                               {"a", "b"});
}

inline SwResidual sw_reduction_check(const SingleCavityParams& p, const HilbertSpace& space) {
    return detail::sw_residual(build_single_mode_full(p, space), sw_generator(p, space),
                               dispersive_hamiltonian(p, space), {"a"});
}

/// Delta_n = Delta_e = -Delta_m = -Delta_f to 1e-12 relative tolerance.
inline bool detuning_match(const SingleCavityParams& p) {
    const double dn = p.Delta_n();
    const double scale = std::max({std::abs(dn), std::abs(p.Delta_e()), std::abs(p.Delta_m()), std::abs(p.Delta_f())});
    if (scale == 0.0) return false;
    const double tol = 1e-12 * scale;
    return std::abs(p.Delta_e() - dn) <= tol && std::abs(p.Delta_m() + dn) <= tol && std::abs(p.Delta_f() + dn) <= tol;
}

/// H(t) = Delta(t)(|e><e| + |f><f|) + G(n s+_eg + m s+_fg + h.c.), Delta(t) from the CRAB pulse.
inline std::function<Operator(double)> build_time_dependent_jc(const PulseCoefficients& pulse, double G,
                                                                const HilbertSpace& space) {
    pulse.validate();
    detail::check_atom(space);
    const Operator excited = detail::atom_op(space, kLevelE, kLevelE) + detail::atom_op(space, kLevelF, kLevelF);
    const Operator c = detail::lower(space, "n") * detail::atom_op(space, kLevelE, kLevelG) +
                       detail::lower(space, "m") * detail::atom_op(space, kLevelF, kLevelG);
    const Operator coupling = G * (c + c.adjoint());
    return [pulse, excited, coupling](double t) { return crab_detuning(t, pulse) * excited + coupling; };
}

}  // namespace magbell
