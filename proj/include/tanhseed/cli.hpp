#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tanhseed {

// Configuration faults exit with code 2; runtime faults with 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One experiment kind's parameter schema, the single source of truth for
// validation and for `describe`.
struct FieldSpec {
    const char* key;
    const char* type;  // "int" | "number" | "string" | "number_list" | "int_list"
    bool required;
    const char* default_text;  // human-readable default, "" when required
    const char* doc;
};

const std::vector<std::string>& experiment_names();
const std::vector<FieldSpec>& experiment_schema(const std::string& experiment);

// Validated config: the raw document plus the resolved seed list. params
// holds the canonical form (defaults filled in, keys sorted) serialized
// to JSON text; runs hash off it.
struct ExperimentConfig {
    std::string experiment;
    std::string name;
    std::string canonical_params;  // JSON text
    std::vector<std::uint64_t> seeds;  // empty for unseeded kinds
};

// Parses and strictly validates a config file: unknown keys, wrong types,
// missing required fields and malformed JSON all raise ConfigError with
// the offending key or line. expect_experiment pins the experiment field
// when invoked through a specific subcommand ("" accepts any).
ExperimentConfig load_config(const std::string& path, const std::string& expect_experiment);

// Executes every seed of the config under out_root/<name>/<run-id>/ and
// writes out_root/<name>/manifest.json referencing every produced file.
// jobs > 1 runs seeds concurrently; outputs are bit-identical either way.
// Returns the manifest path.
std::string run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                           unsigned jobs);

// Schema of one experiment kind as a JSON document.
std::string describe_experiment(const std::string& experiment);

// Runs the cheapest declared run twice under out_root/seedcheck-{a,b} and
// byte-compares all produced files. True when identical.
bool seedcheck(const ExperimentConfig& cfg, const std::string& out_root);

// Full command-line entry; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace tanhseed
