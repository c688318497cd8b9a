#include "jsde/jsde.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "jsde/config.hpp"
#include "jsde/error.hpp"
#include "jsde/noise.hpp"
#include "jsde/report.hpp"
#include "jsde/solver.hpp"
#include "jsde/yw.hpp"

struct jsde_model {
    jsde::config::ModelConfig cfg;
};

struct jsde_path {
    jsde::SolutionPath path;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_pointer;

using jsde::config::json;

jsde_status fail(jsde_status s, const std::string& what, const std::string& pointer = "") {
    g_error = what;
    g_pointer = pointer;
    return s;
}

template <class Fn>
jsde_status guarded(Fn&& fn) {
    g_error.clear();
    g_pointer.clear();
    try {
        return fn();
    } catch (const jsde::ConfigError& e) {
        return fail(JSDE_CONFIG_ERROR, e.what(), e.pointer().empty() ? "/" : e.pointer());
    } catch (const jsde::InvalidArgument& e) {
        return fail(JSDE_INVALID_ARGUMENT, e.what());
    } catch (const jsde::DivergenceError& e) {
        return fail(JSDE_DIVERGENCE, e.what());
    } catch (const jsde::NumericalError& e) {
        return fail(JSDE_NUMERICAL_ERROR, e.what());
    } catch (const json::exception& e) {
        return fail(JSDE_CONFIG_ERROR, e.what(), "/");
    } catch (const std::bad_alloc&) {
        return fail(JSDE_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(JSDE_INTERNAL_ERROR, e.what());
    } catch (...) {
        return fail(JSDE_INTERNAL_ERROR, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

// Reports are printed with two-space indentation and a trailing newline.
std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const char* text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw jsde::ConfigError("", std::string("malformed JSON: ") + e.what());
    }
}

#define REQUIRE_ARG(cond, msg)                                          \
    do {                                                                \
        if (!(cond)) return fail(JSDE_INVALID_ARGUMENT, msg);           \
    } while (0)

}  // namespace

extern "C" {

const char* jsde_version(void) { return "1.0.0"; }

const char* jsde_status_name(jsde_status s) {
    switch (s) {
        case JSDE_OK: return "ok";
        case JSDE_INVALID_ARGUMENT: return "invalid argument";
        case JSDE_CONFIG_ERROR: return "config error";
        case JSDE_DIVERGENCE: return "divergence";
        case JSDE_NUMERICAL_ERROR: return "numerical error";
        case JSDE_IO_ERROR: return "io error";
        case JSDE_INTERNAL_ERROR: return "internal error";
    }
    return "unknown status";
}

const char* jsde_last_error(void) { return g_error.c_str(); }
const char* jsde_last_error_pointer(void) { return g_pointer.c_str(); }
void jsde_string_free(char* s) { std::free(s); }

jsde_status jsde_model_from_json(const char* text, jsde_model** out) {
    REQUIRE_ARG(text && out, "null argument");
    return guarded([&] {
        *out = new jsde_model{jsde::config::parse(parse_json(text))};
        return JSDE_OK;
    });
}

jsde_status jsde_model_from_scenario(const char* name, jsde_model** out) {
    REQUIRE_ARG(name && out, "null argument");
    return guarded([&] {
        *out = new jsde_model{jsde::config::parse(jsde::config::scenario_document(name))};
        return JSDE_OK;
    });
}

jsde_status jsde_model_set_experiment(jsde_model* model, const char* experiment_json) {
    REQUIRE_ARG(model && experiment_json, "null argument");
    return guarded([&] {
        json doc = model->cfg.source;
        const json patch = parse_json(experiment_json);
        if (!patch.is_object()) throw jsde::ConfigError("", "expected an object");
        for (const auto& item : patch.items()) doc["experiment"][item.key()] = item.value();
        model->cfg = jsde::config::parse(doc);
        return JSDE_OK;
    });
}

jsde_status jsde_model_to_json(const jsde_model* model, char** out) {
    REQUIRE_ARG(model && out, "null argument");
    return guarded([&] {
        *out = dup(dump(model->cfg.source));
        return JSDE_OK;
    });
}

void jsde_model_free(jsde_model* model) { delete model; }

jsde_status jsde_scenario_names(char** out) {
    REQUIRE_ARG(out, "null argument");
    return guarded([&] {
        *out = dup(json(jsde::config::scenario_names()).dump());
        return JSDE_OK;
    });
}

jsde_status jsde_scenario_config(const char* name, char** out) {
    REQUIRE_ARG(name && out, "null argument");
    return guarded([&] {
        *out = dup(dump(jsde::config::parse(jsde::config::scenario_document(name)).source));
        return JSDE_OK;
    });
}

jsde_status jsde_check(const jsde_model* model, unsigned threads, char** report, int* gate_pass) {
    REQUIRE_ARG(model && report, "null argument");
    return guarded([&] {
        const json r = jsde::report::run_check(model->cfg, {threads ? threads : 1, false, nullptr});
        if (gate_pass) *gate_pass = r["gate"].get<bool>() ? 1 : 0;
        *report = dup(dump(r));
        return JSDE_OK;
    });
}

jsde_status jsde_simulate(const jsde_model* model, double x0, double horizon, double step, double eps,
                          uint64_t seed, jsde_path** out) {
    REQUIRE_ARG(model && out, "null argument");
    return guarded([&] {
        const auto& m = model->cfg.model;
        const jsde::NoisePath noise = jsde::generate(m.levy, horizon, step, m.cutoff_c, eps, seed);
        *out = new jsde_path{jsde::solve(m, noise, x0)};
        return JSDE_OK;
    });
}

size_t jsde_path_size(const jsde_path* path) { return path ? path->path.times.size() : 0; }

jsde_status jsde_path_point(const jsde_path* path, size_t index, double* time, double* value, int* kind) {
    REQUIRE_ARG(path, "null argument");
    REQUIRE_ARG(index < path->path.times.size(), "index out of range");
    if (time) *time = path->path.times[index];
    if (value) *value = path->path.values[index];
    if (kind) *kind = path->path.kinds[index];
    return JSDE_OK;
}

int jsde_path_blew_up(const jsde_path* path, double* time) {
    if (!path || !path->path.blow_up_time) return 0;
    if (time) *time = *path->path.blow_up_time;
    return 1;
}

jsde_status jsde_path_csv(const jsde_path* path, char** out) {
    REQUIRE_ARG(path && out, "null argument");
    return guarded([&] {
        std::ostringstream os;
        jsde::write_path_csv(os, path->path);
        *out = dup(os.str());
        return JSDE_OK;
    });
}

void jsde_path_free(jsde_path* path) { delete path; }

jsde_status jsde_noise_csv(const jsde_model* model, double horizon, double step, double eps, uint64_t seed,
                           char** out) {
    REQUIRE_ARG(model && out, "null argument");
    return guarded([&] {
        const auto& m = model->cfg.model;
        std::ostringstream os;
        jsde::write_csv(os, jsde::generate(m.levy, horizon, step, m.cutoff_c, eps, seed));
        *out = dup(os.str());
        return JSDE_OK;
    });
}

jsde_status jsde_couple(const jsde_model* model, unsigned threads, int gronwall, char** report) {
    REQUIRE_ARG(model && report, "null argument");
    return guarded([&] {
        const auto cache = jsde::NoiseCache::from_environment();
        const json r = jsde::report::run_couple(model->cfg, {threads ? threads : 1, gronwall != 0,
                                                             cache ? &*cache : nullptr});
        *report = dup(dump(r));
        return JSDE_OK;
    });
}

jsde_status jsde_shrink(const jsde_model* model, unsigned threads, char** report) {
    REQUIRE_ARG(model && report, "null argument");
    return guarded([&] {
        const auto cache = jsde::NoiseCache::from_environment();
        const json r = jsde::report::run_shrink(model->cfg, {threads ? threads : 1, false, cache ? &*cache : nullptr});
        *report = dup(dump(r));
        return JSDE_OK;
    });
}

jsde_status jsde_run_scenario(const jsde_model* model, unsigned threads, char** report) {
    REQUIRE_ARG(model && report, "null argument");
    return guarded([&] {
        const auto cache = jsde::NoiseCache::from_environment();
        const json r = jsde::report::run_scenario(model->cfg, {threads ? threads : 1, true, cache ? &*cache : nullptr});
        *report = dup(dump(r));
        return JSDE_OK;
    });
}

jsde_status jsde_couple_csv(const char* couple_report, char** out) {
    REQUIRE_ARG(couple_report && out, "null argument");
    return guarded([&] {
        const json r = parse_json(couple_report);
        jsde::report::validate(r);
        *out = dup(jsde::report::coupling_csv(r.value("kind", "") == "scenario" ? r["couple"] : r));
        return JSDE_OK;
    });
}

jsde_status jsde_psi_table(const char* modulus_spec, int n_max, const double* grid, size_t grid_size, char** out) {
    REQUIRE_ARG(modulus_spec && out, "null argument");
    REQUIRE_ARG(grid || grid_size == 0, "null grid with nonzero size");
    return guarded([&] {
        const jsde::Modulus h = jsde::config::parse_modulus_spec(modulus_spec);
        if (n_max < 1) throw jsde::InvalidArgument("n must be at least 1");
        const auto seq = jsde::ApproximationSequence::build(h, n_max);
        std::ostringstream os;
        if (grid) {
            const std::vector<double> g(grid, grid + grid_size);
            jsde::write_psi_table(os, seq, n_max, &g);
        } else {
            jsde::write_psi_table(os, seq, n_max);
        }
        *out = dup(os.str());
        return JSDE_OK;
    });
}

jsde_status jsde_validate_report(const char* report) {
    REQUIRE_ARG(report, "null argument");
    return guarded([&] {
        jsde::report::validate(parse_json(report));
        return JSDE_OK;
    });
}

}  // extern "C"
