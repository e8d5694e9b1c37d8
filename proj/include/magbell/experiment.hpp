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

#include "magbell/measurement.hpp"
#include "magbell/optimize.hpp"
#include "magbell/validation.hpp"

#include "json.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef MAGBELL_VERSION
#define MAGBELL_VERSION "0.0.0"
#endif

namespace magbell {

using Json = nlohmann::json;

inline constexpr const char* kUnits = "frequencies, couplings and rates in units of omega_m; times in units of 1/omega_m";

enum class Scenario {
    BellDistill,
    HalfInterval,
    DecoherePrepare,
    Stabilize,
    CoherentDistill,
    NBell,
    SingleShot,
    CouplingRatio,
    ValidateDispersive,
};

inline constexpr std::array<std::pair<Scenario, std::string_view>, 9> kScenarioNames{{
    {Scenario::BellDistill, "bell-distill"},
    {Scenario::HalfInterval, "half-interval"},
    {Scenario::DecoherePrepare, "decohere-prepare"},
    {Scenario::Stabilize, "stabilize"},
    {Scenario::CoherentDistill, "coherent-distill"},
    {Scenario::NBell, "nbell"},
    {Scenario::SingleShot, "single-shot"},
    {Scenario::CouplingRatio, "coupling-ratio"},
    {Scenario::ValidateDispersive, "validate-dispersive"},
}};

inline std::string to_string(Scenario s) {
    for (const auto& [value, name] : kScenarioNames) {
        if (value == s) return std::string(name);
    }
    return "unknown";
}

inline Scenario parse_scenario(const std::string& name) {
    for (const auto& [value, label] : kScenarioNames) {
        if (label == name) return value;
    }
    fail(ErrorKind::Config, "unknown scenario '" + name + "'");
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    fail(ErrorKind::Config, "unknown format '" + name + "' (expected csv or json)");
}

inline std::string to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

/// A validated config; `params` holds every scenario parameter with defaults
/// filled in, so it alone reproduces the run.
struct ExperimentConfig {
    Scenario scenario = Scenario::BellDistill;
    std::uint64_t seed = 2024;
    std::string output;  // empty: standard output
    OutputFormat format = OutputFormat::Csv;
    Json params = Json::object();

    Json to_json() const {
        return Json{{"scenario", to_string(scenario)},
                    {"seed", seed},
                    {"output", output},
                    {"format", to_string(format)},
                    {"params", params}};
    }
};

namespace detail {

enum class ParamKind { Number, OptionalNumber, Count, OptionalCount };

struct ParamSpec {
    const char* key;
    ParamKind kind;
    Json fallback;
};

inline std::vector<ParamSpec> param_schema(Scenario s) {
    using K = ParamKind;
    const Json none = nullptr;
    switch (s) {
        case Scenario::BellDistill:
        case Scenario::HalfInterval:
            return {{"G_e", K::Number, 1e-3},
                    {"G_f", K::Number, 1e-3},
                    {"Delta", K::Number, 0.0},
                    {"rounds", K::Count, s == Scenario::BellDistill ? 8 : 15},
                    {"cutoff", K::Count, 3},
                    {"tau", K::OptionalNumber, none}};
        case Scenario::DecoherePrepare:
        case Scenario::Stabilize:
            return {{"G_e", K::Number, 6e-3},
                    {"G_f", K::Number, 6e-3},
                    {"Delta", K::Number, 0.0},
                    {"gamma_n", K::Number, 1e-4},
                    {"gamma_m", K::Number, 1e-4},
                    {"rounds", K::Count, 8},
                    {"cutoff", K::Count, 3},
                    {"tau", K::OptionalNumber, none},
                    {"steps_per_interval", K::Count, 2000},
                    {"trace_tol", K::Number, 1e-8}};
        case Scenario::CoherentDistill:
            return {{"beta_n", K::Number, 1.0},
                    {"beta_m", K::Number, 1.0},
                    {"G_e", K::Number, 1e-3},
                    {"G_f", K::Number, 1.2e-3},
                    {"Delta", K::Number, 0.0},
                    {"rounds", K::Count, 50},
                    {"target_N", K::Count, 1},
                    {"cutoff", K::OptionalCount, none},
                    {"tau", K::OptionalNumber, none},
                    {"leakage_tol", K::Number, kDefaultLeakageTolerance}};
        case Scenario::NBell:
            return {{"target_N", K::Count, 2},
                    {"beta", K::OptionalNumber, none},
                    {"G_e", K::Number, 1e-3},
                    {"G_f", K::Number, 1.2e-3},
                    {"Delta", K::Number, 0.0},
                    {"rounds", K::Count, 100},
                    {"cutoff", K::OptionalCount, none},
                    {"tau", K::OptionalNumber, none},
                    {"leakage_tol", K::Number, kDefaultLeakageTolerance}};
        case Scenario::SingleShot:
            return {{"G", K::Number, 1e-3},
                    {"n_omega", K::Count, 4},
                    {"restarts", K::Count, 8},
                    {"max_iterations", K::Count, 1500},
                    {"x_tolerance", K::Number, 1e-6},
                    {"f_tolerance", K::Number, 1e-12},
                    {"initial_step", K::Number, 0.5},
                    {"init_scale", K::Number, 2.0},
                    {"slices", K::Count, 512}};
        case Scenario::CouplingRatio:
            return {{"xi_min", K::Number, 0.8}, {"xi_max", K::Number, 1.2}, {"points", K::Count, 81}};
        case Scenario::ValidateDispersive:
            return {{"g", K::Number, 0.005},
                    {"Delta", K::Number, 0.1},
                    {"cavity_cutoff", K::Count, 3},
                    {"magnon_cutoff", K::Count, 4},
                    {"halvings", K::Count, 1}};
    }
    return {};
}

inline Json resolve_param(const ParamSpec& spec, const Json& value) {
    const std::string where = std::string("params.") + spec.key;
    const bool optional = spec.kind == ParamKind::OptionalNumber || spec.kind == ParamKind::OptionalCount;
    if (value.is_null()) {
        if (optional) return nullptr;
        fail(ErrorKind::Config, where + " must not be null");
    }
    if (spec.kind == ParamKind::Number || spec.kind == ParamKind::OptionalNumber) {
        if (!value.is_number()) fail(ErrorKind::Config, where + " must be a number");
        const double v = value.get<double>();
        if (!std::isfinite(v)) fail(ErrorKind::Config, where + " must be finite");
        return v;
    }
    if (!value.is_number_integer() || (value.is_number_integer() && !value.is_number_unsigned() && value.get<std::int64_t>() < 0)) {
        fail(ErrorKind::Config, where + " must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
}

/// Defaults that depend on other parameters (coherent amplitudes, cutoffs).
inline void resolve_dependent(Scenario s, Json& p) {
    const auto cutoff_for = [&](std::initializer_list<double> betas, std::size_t N) {
        std::size_t d = std::max<std::size_t>(10, N + 1);
        for (double b : betas) d = std::max(d, coherent_cutoff(b, 10, p["leakage_tol"].get<double>()));
        return d;
    };
    if (s == Scenario::NBell) {
        const auto N = p["target_N"].get<std::size_t>();
        if (p["beta"].is_null()) {
            // amplitudes used for the N = 1, 2, 3 targets
            static constexpr std::array<double, 3> kBeta{1.0, 1.2, 1.3};
            if (N < 1 || N > kBeta.size()) fail(ErrorKind::Config, "params.beta has no default for target_N = " + std::to_string(N));
            p["beta"] = kBeta[N - 1];
        }
        if (p["cutoff"].is_null()) p["cutoff"] = cutoff_for({p["beta"].get<double>()}, N);
    }
    if (s == Scenario::CoherentDistill && p["cutoff"].is_null()) {
        p["cutoff"] = cutoff_for({p["beta_n"].get<double>(), p["beta_m"].get<double>()}, p["target_N"].get<std::size_t>());
    }
}

inline void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(ErrorKind::Config, "unknown key '" + key + "' in " + where);
    }
}

}  // namespace detail

/// Strict parse: unknown keys and mistyped values are config errors.
inline ExperimentConfig parse_config(const Json& doc) {
    if (!doc.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
    detail::check_keys(doc, {"scenario", "seed", "output", "format", "params"}, "config");
    if (!doc.contains("scenario") || !doc["scenario"].is_string()) fail(ErrorKind::Config, "config.scenario must be a string");

    ExperimentConfig cfg;
    cfg.scenario = parse_scenario(doc["scenario"].get<std::string>());
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail(ErrorKind::Config, "config.seed must be a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) fail(ErrorKind::Config, "config.output must be a string");
        cfg.output = doc["output"].get<std::string>();
    }
    if (doc.contains("format")) {
        if (!doc["format"].is_string()) fail(ErrorKind::Config, "config.format must be a string");
        cfg.format = parse_format(doc["format"].get<std::string>());
    }
    const Json given = doc.contains("params") ? doc["params"] : Json::object();
    if (!given.is_object()) fail(ErrorKind::Config, "config.params must be an object");

    const auto schema = detail::param_schema(cfg.scenario);
    for (const auto& [key, value] : given.items()) {
        bool known = false;
        for (const auto& spec : schema) known = known || key == spec.key;
        if (!known) fail(ErrorKind::Config, "unknown key '" + key + "' in params for scenario " + to_string(cfg.scenario));
    }
    for (const auto& spec : schema) {
        cfg.params[spec.key] = detail::resolve_param(spec, given.contains(spec.key) ? given[spec.key] : spec.fallback);
    }
    detail::resolve_dependent(cfg.scenario, cfg.params);
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    Json metadata = Json::object();

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) fail(ErrorKind::InvalidArgument, "row width differs from column count");
        for (double v : row) {
            if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite value in result row");
        }
        rows.push_back(std::move(row));
    }
};

namespace detail {

template <typename T>
T get(const Json& p, const char* key) {
    return p.at(key).get<T>();
}

inline std::optional<double> get_optional(const Json& p, const char* key) {
    if (p.at(key).is_null()) return std::nullopt;
    return p.at(key).get<double>();
}

inline ProtocolConfig protocol_config(const Json& p, std::size_t target_N) {
    ProtocolConfig cfg;
    cfg.eff = EffectiveParams::resonant(get<double>(p, "G_e"), get<double>(p, "G_f"), get<double>(p, "Delta"));
    cfg.tau = get_optional(p, "tau");
    cfg.rounds = get<std::size_t>(p, "rounds");
    cfg.target_N = target_N;
    if (p.contains("gamma_n")) {
        cfg.decoherence = Decoherence{get<double>(p, "gamma_n"), get<double>(p, "gamma_m")};
        cfg.steps_per_interval = get<std::size_t>(p, "steps_per_interval");
        cfg.trace_tol = get<double>(p, "trace_tol");
    }
    return cfg;
}

inline ResultTable protocol_table(const ProtocolRecord& rec, Json summary) {
    ResultTable t;
    t.columns = {"round",       "time",         "fidelity_plus",       "fidelity_minus",   "target_fidelity",
                 "infidelity",  "success_probability", "even_population", "round_probability"};
    for (const auto& r : rec.rounds) {
        const double target = rec.target_fidelity(r.round);
        t.add_row({static_cast<double>(r.round), r.time, r.fidelity_plus, r.fidelity_minus, target, 1.0 - target,
                   r.success_probability, r.even_population, r.round_probability});
    }
    summary["tau"] = rec.tau;
    summary["distilled_round"] = rec.distilled_round ? Json(*rec.distilled_round) : Json(nullptr);
    Json stalled = Json::array();
    for (const auto& [n, m] : rec.stalled_states) stalled.push_back({n, m});
    summary["stalled_states"] = stalled;
    t.metadata["summary"] = std::move(summary);
    return t;
}

inline ResultTable run_protocol_scenario(const ExperimentConfig& cfg) {
    const Json& p = cfg.params;
    switch (cfg.scenario) {
        case Scenario::BellDistill:
        case Scenario::HalfInterval:
        case Scenario::DecoherePrepare: {
            ProtocolConfig pc = protocol_config(p, 1);
            if (cfg.scenario == Scenario::HalfInterval) pc.interval_mode = IntervalMode::Half;
            return protocol_table(run_protocol(superposed_state(get<std::size_t>(p, "cutoff")), pc), Json::object());
        }
        case Scenario::CoherentDistill: {
            const auto N = get<std::size_t>(p, "target_N");
            const auto d = get<std::size_t>(p, "cutoff");
            const double tol = get<double>(p, "leakage_tol");
            const double bn = get<double>(p, "beta_n");
            const double bm = get<double>(p, "beta_m");
            const QuantumState init = coherent_pair(bn, bm, d, tol);
            return protocol_table(run_protocol(init, protocol_config(p, N)),
                                  Json{{"leakage_n", coherent_leakage(bn, d)}, {"leakage_m", coherent_leakage(bm, d)}});
        }
        case Scenario::NBell: {
            const auto N = get<std::size_t>(p, "target_N");
            const auto d = get<std::size_t>(p, "cutoff");
            const double beta = get<double>(p, "beta");
            const QuantumState init = coherent_pair(beta, beta, d, get<double>(p, "leakage_tol"));
            return protocol_table(run_protocol(init, protocol_config(p, N)), Json{{"leakage", coherent_leakage(beta, d)}});
        }
        default:
            break;
    }
    fail(ErrorKind::InvalidArgument, "not a protocol scenario");
}

inline ResultTable run_stabilize(const Json& p) {
    const ProtocolConfig pc = protocol_config(p, 1);
    const StabilizationRecord rec = stabilize(bell_state(magnon_space(get<std::size_t>(p, "cutoff")), 1, +1), pc);
    ResultTable t;
    t.columns = {"round", "time", "fidelity_stab", "fidelity_free", "success_probability"};
    for (std::size_t r = 0; r < rec.times.size(); ++r) {
        t.add_row({static_cast<double>(r), rec.times[r], rec.fidelity_stab[r], rec.fidelity_free[r],
                   rec.success_probability[r]});
    }
    t.metadata["summary"] = Json{{"tau", rec.tau}};
    return t;
}

inline ResultTable run_single_shot(const Json& p, std::uint64_t seed) {
    OptimizerConfig oc;
    oc.n_omega = get<std::size_t>(p, "n_omega");
    oc.restarts = get<std::size_t>(p, "restarts");
    oc.simplex.max_iterations = get<std::size_t>(p, "max_iterations");
    oc.simplex.x_tolerance = get<double>(p, "x_tolerance");
    oc.simplex.f_tolerance = get<double>(p, "f_tolerance");
    oc.simplex.initial_step = get<double>(p, "initial_step");
    oc.init_scale = get<double>(p, "init_scale");
    oc.slices = get<std::size_t>(p, "slices");
    oc.seed = seed;
    const double G = get<double>(p, "G");
    const OptimizationResult res = optimize_single_shot(EffectiveParams::resonant(G, G), oc);

    ResultTable t;
    t.columns = {"time", "detuning_over_G", "fidelity"};
    for (std::size_t k = 0; k < res.trace_times.size(); ++k) {
        t.add_row({res.trace_times[k], crab_detuning(res.trace_times[k], res.pulse) / G, res.trace_fidelity[k]});
    }
    t.metadata["summary"] = Json{{"fidelity", res.fidelity},
                                 {"success_probability", res.success_probability},
                                 {"baseline_fidelity", res.baseline_fidelity},
                                 {"iterations", res.iterations},
                                 {"best_restart", res.best_restart},
                                 {"tau", res.pulse.tau_total},
                                 {"a", res.pulse.a},
                                 {"b", res.pulse.b}};
    return t;
}

inline ResultTable run_coupling_ratio(const Json& p) {
    const double lo = get<double>(p, "xi_min");
    const double hi = get<double>(p, "xi_max");
    const auto points = get<std::size_t>(p, "points");
    if (points < 2 || !(hi > lo)) fail(ErrorKind::InvalidArgument, "coupling-ratio sweep needs points >= 2 and xi_max > xi_min");
    ResultTable t;
    t.columns = {"xi", "fidelity_exact", "fidelity_approx", "difference"};
    double best = -1.0;
    double best_xi = lo;
    for (std::size_t i = 0; i < points; ++i) {
        const double xi = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double exact = coupling_ratio_fidelity(xi, false);
        const double approx = coupling_ratio_fidelity(xi, true);
        t.add_row({xi, exact, approx, exact - approx});
        if (exact > best) {
            best = exact;
            best_xi = xi;
        }
    }
    t.metadata["summary"] = Json{{"argmax_xi", best_xi}, {"max_fidelity", best}};
    return t;
}

inline ResultTable run_validate_dispersive(const Json& p) {
    const double g0 = get<double>(p, "g");
    const double Delta = get<double>(p, "Delta");
    const auto c = get<std::size_t>(p, "cavity_cutoff");
    const auto d = get<std::size_t>(p, "magnon_cutoff");
    const auto halvings = get<std::size_t>(p, "halvings");
    ResultTable t;
    t.columns = {"g", "g_over_Delta", "G", "tau", "residual_low_excitation", "residual_cavity_vacuum",
                 "evolution_fidelity"};
    std::vector<double> residuals;
    for (std::size_t k = 0; k <= halvings; ++k) {
        const double g = g0 / std::pow(2.0, static_cast<double>(k));
        const DispersiveValidation v = validate_dispersive(symmetric_dispersive_params(g, Delta), c, d);
        t.add_row({g, v.ratio, v.eff.G_e, v.tau, v.residual.low_excitation, v.residual.cavity_vacuum,
                   v.evolution_fidelity});
        residuals.push_back(v.residual.low_excitation);
    }
    Json slopes = Json::array();
    for (std::size_t k = 1; k < residuals.size(); ++k) {
        if (residuals[k] > 0.0 && residuals[k - 1] > 0.0) slopes.push_back(std::log2(residuals[k - 1] / residuals[k]));
    }
    t.metadata["summary"] = Json{{"log_slopes", slopes}};
    return t;
}

}  // namespace detail

/// Runs one scenario; the table metadata embeds the resolved config.
inline ResultTable run_scenario(const ExperimentConfig& cfg) {
    ResultTable t;
    switch (cfg.scenario) {
        case Scenario::Stabilize:
            t = detail::run_stabilize(cfg.params);
            break;
        case Scenario::SingleShot:
            t = detail::run_single_shot(cfg.params, cfg.seed);
            break;
        case Scenario::CouplingRatio:
            t = detail::run_coupling_ratio(cfg.params);
            break;
        case Scenario::ValidateDispersive:
            t = detail::run_validate_dispersive(cfg.params);
            break;
        default:
            t = detail::run_protocol_scenario(cfg);
            break;
    }
    Json summary = t.metadata.contains("summary") ? t.metadata["summary"] : Json::object();
    t.metadata = Json{{"scenario", to_string(cfg.scenario)},
                      {"version", MAGBELL_VERSION},
                      {"seed", cfg.seed},
                      {"units", kUnits},
                      {"config", cfg.to_json()},
                      {"summary", std::move(summary)}};
    return t;
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// '#'-prefixed metadata lines, a label row, then one line per row.
inline std::string emit_csv(const ResultTable& t) {
    std::string out;
    const auto meta = [&](const char* key) {
        if (!t.metadata.contains(key)) return;
        const Json& v = t.metadata[key];
        out += std::string("# ") + key + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    };
    for (const char* key : {"scenario", "version", "seed", "units", "config", "summary"}) meta(key);
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
        out += "\n";
    }
    return out;
}

inline std::string emit_json(const ResultTable& t) {
    return Json{{"metadata", t.metadata}, {"columns", t.columns}, {"rows", t.rows}}.dump() + "\n";
}

inline std::string emit(const ResultTable& t, OutputFormat format) {
    return format == OutputFormat::Csv ? emit_csv(t) : emit_json(t);
}

/// Recovers the config from the '# config:' line of a CSV output or the
/// metadata of a JSON output.
inline ExperimentConfig config_from_output(const std::string& text) {
    const std::string tag = "# config: ";
    if (text.rfind("#", 0) == 0) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line) && line.rfind("#", 0) == 0) {
            if (line.rfind(tag, 0) == 0) return parse_config_text(line.substr(tag.size()));
        }
        fail(ErrorKind::Config, "no '# config:' line in output header");
    }
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::Config, std::string("malformed JSON output: ") + e.what());
    }
    if (!doc.contains("metadata") || !doc["metadata"].contains("config")) fail(ErrorKind::Config, "output has no config");
    return parse_config(doc["metadata"]["config"]);
}

/// Process exit code for an error: 2 config, 3 physics regime, 4 optimizer.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
        case ErrorKind::InvalidDimension:
        case ErrorKind::UnknownLabel:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::SpaceMismatch:
            return 2;
        case ErrorKind::Truncation:
        case ErrorKind::RegimeViolation:
        case ErrorKind::NullOutcome:
        case ErrorKind::ZeroTargetOverlap:
        case ErrorKind::StepSize:
        case ErrorKind::ZeroDetuning:
        case ErrorKind::NonHermitian:
        case ErrorKind::TimeOutOfRange:
            return 3;
        case ErrorKind::OptimizerAbort:
            return 4;
        default:
            return 1;
    }
}

inline std::string error_record(const std::string& kind, const std::string& message, int code) {
    return Json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump() + "\n";
}

}  // namespace magbell
