#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergolang/potential.hpp"
#include "ergolang/quadrature.hpp"
#include "ergolang/simulate.hpp"

namespace ergolang {

struct OutputOptions {
    std::string directory = "out";
    bool write_csv = true;
    bool write_overlay = true;
};

// Parsed experiment configuration. The experiment block keeps its raw JSON;
// each runner pulls its own parameters with documented defaults.
struct ExperimentConfig {
    PotentialSpec potential;
    bool allow_marginal_exponent = false;
    LangevinParams langevin;
    IntegratorSettings integrator;
    QuadratureSettings quadrature;
    std::uint64_t master_seed = 1;
    OutputOptions output;
    std::string experiment;
    nlohmann::json experiment_params;
};

// Known experiment tags, in the order they are documented.
const std::vector<std::string>& known_experiments();

// Throws ConfigParse naming the missing/invalid field.
ExperimentConfig parse_config(const nlohmann::json& j);

// Full canonical form with every default materialised; parse(serialize(c))
// reproduces c exactly.
nlohmann::json serialize_config(const ExperimentConfig& c);

// Reads a JSON file and applies key=value overrides (dot-separated paths;
// values parsed as JSON literals, falling back to strings).
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace ergolang
