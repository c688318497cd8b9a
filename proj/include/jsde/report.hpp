#pragma once

#include <string>

#include "jsde/config.hpp"
#include "jsde/coupling.hpp"
#include "jsde/model.hpp"

namespace jsde::report {

using json = nlohmann::json;

json to_json(const ConditionReport& r, const SampleSpec& spec);
json to_json(const CouplingReport& r);
json to_json(const ShrinkReport& r);
json to_json(const GronwallDiagnostic& g);

struct RunOptions {
    unsigned threads = 1;
    bool gronwall = true;  // couple: also run the Gronwall diagnostic per psi level
    const NoiseCache* cache = nullptr;
};

// Condition report of the configured model over its domain.
json run_check(const config::ModelConfig& cfg, const RunOptions& opt);

// couple from (x0 + gap, x0), with psi levels and optional Gronwall records.
json run_couple(const config::ModelConfig& cfg, const RunOptions& opt);

// shrink_study over experiment.gaps.
json run_shrink(const config::ModelConfig& cfg, const RunOptions& opt);

// Check, coupling, shrink study and Gronwall diagnostics in one document.
json run_scenario(const config::ModelConfig& cfg, const RunOptions& opt);

// Per-time CSV of a coupling report: time,mean_abs_gap,std_err,psi_<n>...
std::string coupling_csv(const json& couple_report);

// Structural validation of any emitted report; throws ConfigError with a JSON
// pointer to the first offending member.
void validate(const json& report);

}  // namespace jsde::report
