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

// Command-line runner for the named scenarios.
//
//   magbell run --config <file> [--format csv|json] [--out <path>] [--seed <u64>]
//   magbell validate --config <file>

#include "magbell/experiment.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

int report(const std::string& kind, const std::string& message, int code) {
    std::cerr << magbell::error_record(kind, message, code);
    return code;
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        if (!std::cout) magbell::fail(magbell::ErrorKind::Io, "failed writing to standard output");
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) magbell::fail(magbell::ErrorKind::Io, "cannot open output file '" + path + "'");
    out << text;
    if (!out) magbell::fail(magbell::ErrorKind::Io, "failed writing output file '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-state distillation by repeated parity measurement", "magbell"};
    app.set_version_flag("--version", MAGBELL_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> format;
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;

    CLI::App* run = app.add_subcommand("run", "run a scenario and emit its result table");
    run->add_option("--config", config_path, "scenario config (JSON)")->required();
    run->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--out", out_path, "output path (default: standard output)");
    run->add_option("--seed", seed, "seed override");

    CLI::App* validate = app.add_subcommand("validate", "parse a config and print it with defaults resolved");
    validate->add_option("--config", config_path, "scenario config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report("usage", e.what(), 2);
    }

    try {
        magbell::ExperimentConfig cfg = magbell::load_config(config_path);
        if (validate->parsed()) {
            std::cout << cfg.to_json().dump(2) << "\n";
            return 0;
        }
        if (format) cfg.format = magbell::parse_format(*format);
        if (out_path) cfg.output = *out_path;
        if (seed) cfg.seed = *seed;
        const magbell::ResultTable table = magbell::run_scenario(cfg);
        write_output(cfg.output, magbell::emit(table, cfg.format));
        return 0;
    } catch (const magbell::Error& e) {
        return report(std::string(magbell::to_string(e.kind())), e.what(), magbell::exit_code(e.kind()));
    } catch (const std::exception& e) {
        return report("internal", e.what(), 1);
    }
}
