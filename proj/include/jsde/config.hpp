#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "jsde/model.hpp"

namespace jsde::config {

using json = nlohmann::json;

// Rectangle over which the condition checkers sample.
struct Domain {
    double t_max = 1.0;
    double x_lo = -1.0;
    double x_hi = 1.0;
    int nt = 41;
    int nx = 81;
};

// Parameters of the coupling experiments.
struct Experiment {
    double x0 = 1.0;
    double gap = 1e-3;
    double horizon = 1.0;
    double step = 1e-3;
    double eps = 1e-3;
    std::size_t paths = 1000;
    std::vector<double> gaps{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<int> psi_n{1, 2, 5};
    std::uint64_t seed = 1;
};

/// A model built from the coefficient catalog together with its check domain
/// and experiment defaults.
///
/// Catalog: drift affine; sigma constant, scale*sqrt(x v 0) or scale*|x|^gamma;
/// f2 zero, clamp(intercept + slope x, lo, hi) * y or (constant + linear t) * y;
/// f1 zero, y or clamp(intercept + slope x, lo, hi) * y.
struct ModelConfig {
    std::string name = "model";
    std::string description;
    bool demonstration_only = false;
    JumpSDEModel model;
    Domain domain;
    Experiment experiment;
    json source;  // normalized document, every default filled in
};

// Throws ConfigError with a JSON pointer to the offending key. Unknown keys are
// rejected at every level.
ModelConfig parse(const json& doc);
ModelConfig parse_text(const std::string& text);

// Experiment section only (used for command-line overrides).
Experiment parse_experiment(const json& doc, const std::string& pointer, const Experiment& defaults);

// Condition sampling grid for the configured domain.
SampleSpec sample_spec(const ModelConfig& cfg, unsigned threads);

// "power:0.5", "power:0.5:2" (gamma, scale) or "linear" / "linear:3".
Modulus parse_modulus_spec(const std::string& spec);

// Built-in scenarios: pure-diffusion-yw, cir-stable, additive-jumps,
// bass-alpha-big, nonunique-demo.
std::vector<std::string> scenario_names();
json scenario_document(const std::string& name);

}  // namespace jsde::config
