// Command-line front end. Everything numeric goes through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jsde/jsde.h"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kGateFail = 1, kUsage = 2, kRuntime = 3 };

struct Failure {
    int code;
};

struct CString {
    char* p = nullptr;
    ~CString() { jsde_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct ModelDeleter {
    void operator()(jsde_model* m) const { jsde_model_free(m); }
};
using ModelPtr = std::unique_ptr<jsde_model, ModelDeleter>;

struct PathDeleter {
    void operator()(jsde_path* p) const { jsde_path_free(p); }
};
using PathPtr = std::unique_ptr<jsde_path, PathDeleter>;

// Config and argument problems are usage errors; the rest are runtime errors.
void check(jsde_status s) {
    if (s == JSDE_OK) return;
    if (s == JSDE_CONFIG_ERROR) {
        std::cerr << "jsde: " << jsde_last_error() << "\n";
    } else {
        std::cerr << "jsde: " << jsde_status_name(s) << ": " << jsde_last_error() << "\n";
    }
    throw Failure{(s == JSDE_CONFIG_ERROR || s == JSDE_INVALID_ARGUMENT) ? kUsage : kRuntime};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "jsde: cannot read " << path << "\n";
        throw Failure{kUsage};
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(out, std::ios::binary);
    f << text;
    f.close();
    if (!f) {
        std::cerr << "jsde: cannot write " << out << "\n";
        throw Failure{kRuntime};
    }
}

struct ModelSource {
    std::string config;
    std::string scenario;

    void add_to(CLI::App* app) {
        auto* c = app->add_option("--config", config, "Model config (JSON)");
        auto* s = app->add_option("--scenario", scenario, "Built-in scenario name instead of --config");
        c->excludes(s);
    }

    ModelPtr load() const {
        jsde_model* m = nullptr;
        if (!config.empty()) {
            check(jsde_model_from_json(read_file(config).c_str(), &m));
        } else if (!scenario.empty()) {
            check(jsde_model_from_scenario(scenario.c_str(), &m));
        } else {
            std::cerr << "jsde: one of --config or --scenario is required\n";
            throw Failure{kUsage};
        }
        return ModelPtr(m);
    }
};

// Command-line overrides of the config's experiment block.
struct ExperimentFlags {
    std::optional<double> x0, gap, horizon, step, eps;
    std::optional<long long> paths;
    std::optional<unsigned long long> seed;
    std::vector<double> gaps;
    std::vector<int> psi_n;

    void add_common(CLI::App* app) {
        app->add_option("--seed", seed, "Base seed");
        app->add_option("--horizon", horizon, "Time horizon T");
        app->add_option("--step", step, "Base grid step");
        app->add_option("--eps", eps, "Small-jump truncation level");
        app->add_option("--x0", x0, "Initial value");
    }
    void add_paths(CLI::App* app) { app->add_option("--paths", paths, "Number of coupled pairs"); }

    void apply(jsde_model* m) const {
        json e = json::object();
        if (x0) e["x0"] = *x0;
        if (gap) e["gap"] = *gap;
        if (horizon) e["horizon"] = *horizon;
        if (step) e["step"] = *step;
        if (eps) e["eps"] = *eps;
        if (paths) e["paths"] = *paths;
        if (seed) e["seed"] = *seed;
        if (!gaps.empty()) e["gaps"] = gaps;
        if (!psi_n.empty()) e["psi_n"] = psi_n;
        if (!e.empty()) check(jsde_model_set_experiment(m, e.dump().c_str()));
    }
};

json experiment_of(const jsde_model* m) {
    CString s;
    check(jsde_model_to_json(m, &s.p));
    return json::parse(s.str())["experiment"];
}

unsigned default_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n ? n : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise uniqueness diagnostics for jump SDEs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(jsde_version()));

    unsigned threads = default_threads();
    std::string out;
    ModelSource src;
    ExperimentFlags ex;

    auto* check_cmd = app.add_subcommand("check", "Check the uniqueness hypotheses on a model");
    bool strict = false;
    src.add_to(check_cmd);
    check_cmd->add_option("--out", out, "Report path (default stdout)");
    check_cmd->add_option("--threads", threads, "Worker threads");
    check_cmd->add_flag("--strict", strict, "Exit 1 when the gate fails");

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate one path");
    std::string noise_out;
    src.add_to(sim_cmd);
    ex.add_common(sim_cmd);
    sim_cmd->add_option("--out", out, "Path CSV (default stdout)");
    sim_cmd->add_option("--noise-out", noise_out, "Also write the driving noise as CSV");

    auto* couple_cmd = app.add_subcommand("couple", "Couple two solutions on shared noise");
    std::string csv_out;
    bool no_gronwall = false;
    src.add_to(couple_cmd);
    ex.add_common(couple_cmd);
    ex.add_paths(couple_cmd);
    couple_cmd->add_option("--gap", ex.gap, "Initial gap between the two starts");
    couple_cmd->add_option("--psi-n", ex.psi_n, "Approximation indices for the Gronwall check")->delimiter(',');
    couple_cmd->add_option("--out", out, "Report path (default stdout)");
    couple_cmd->add_option("--csv", csv_out, "Per-time CSV for plotting");
    couple_cmd->add_option("--threads", threads, "Worker threads");
    couple_cmd->add_flag("--no-gronwall", no_gronwall, "Skip the Gronwall diagnostic");

    auto* shrink_cmd = app.add_subcommand("shrink", "Terminal gap against initial gap");
    src.add_to(shrink_cmd);
    ex.add_common(shrink_cmd);
    ex.add_paths(shrink_cmd);
    shrink_cmd->add_option("--gaps", ex.gaps, "Strictly decreasing initial gaps")->delimiter(',');
    shrink_cmd->add_option("--out", out, "Report path (default stdout)");
    shrink_cmd->add_option("--threads", threads, "Worker threads");

    auto* yw_cmd = app.add_subcommand("yw", "Tabulate the approximating functions");
    std::string modulus = "power:0.5";
    int n_max = 10;
    yw_cmd->add_option("--modulus", modulus, "power:GAMMA[:SCALE] or linear[:SCALE]");
    yw_cmd->add_option("--n", n_max, "Highest index")->check(CLI::PositiveNumber);
    yw_cmd->add_option("--out", out, "Table CSV (default stdout)");

    auto* scen_cmd = app.add_subcommand("scenario", "Run a scenario end to end");
    std::string scen_name;
    bool list = false;
    scen_cmd->add_option("name", scen_name, "Built-in scenario name");
    scen_cmd->add_option("--config", src.config, "Scenario config (JSON) instead of a name");
    scen_cmd->add_flag("--list", list, "List built-in scenarios");
    ex.add_common(scen_cmd);
    ex.add_paths(scen_cmd);
    scen_cmd->add_option("--out", out, "Report path (default stdout)");
    scen_cmd->add_option("--threads", threads, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*check_cmd) {
            ModelPtr m = src.load();
            CString r;
            int pass = 0;
            check(jsde_check(m.get(), threads, &r.p, &pass));
            emit(out, r.str());
            return (strict && !pass) ? kGateFail : kOk;
        }
        if (*sim_cmd) {
            ModelPtr m = src.load();
            ex.apply(m.get());
            const json e = experiment_of(m.get());
            const double x0 = e["x0"], horizon = e["horizon"], step = e["step"], eps = e["eps"];
            const auto seed = e["seed"].get<std::uint64_t>();
            jsde_path* p = nullptr;
            check(jsde_simulate(m.get(), x0, horizon, step, eps, seed, &p));
            PathPtr path(p);
            CString csv;
            check(jsde_path_csv(path.get(), &csv.p));
            emit(out, csv.str());
            if (!noise_out.empty()) {
                CString n;
                check(jsde_noise_csv(m.get(), horizon, step, eps, seed, &n.p));
                emit(noise_out, n.str());
            }
            double t = 0.0;
            if (jsde_path_blew_up(path.get(), &t)) std::cerr << "jsde: path exceeded the overflow guard at t=" << t << "\n";
            return kOk;
        }
        if (*couple_cmd) {
            ModelPtr m = src.load();
            ex.apply(m.get());
            CString r;
            check(jsde_couple(m.get(), threads, no_gronwall ? 0 : 1, &r.p));
            emit(out, r.str());
            if (!csv_out.empty()) {
                CString c;
                check(jsde_couple_csv(r.p, &c.p));
                emit(csv_out, c.str());
            }
            return kOk;
        }
        if (*shrink_cmd) {
            ModelPtr m = src.load();
            ex.apply(m.get());
            CString r;
            check(jsde_shrink(m.get(), threads, &r.p));
            emit(out, r.str());
            return kOk;
        }
        if (*yw_cmd) {
            CString t;
            check(jsde_psi_table(modulus.c_str(), n_max, nullptr, 0, &t.p));
            emit(out, t.str());
            return kOk;
        }
        if (*scen_cmd) {
            if (list) {
                CString names;
                check(jsde_scenario_names(&names.p));
                for (const auto& n : json::parse(names.str())) std::cout << n.get<std::string>() << "\n";
                return kOk;
            }
            if (!scen_name.empty() && !src.config.empty()) {
                std::cerr << "jsde: give a scenario name or --config, not both\n";
                return kUsage;
            }
            src.scenario = scen_name;
            ModelPtr m = src.load();
            ex.apply(m.get());
            CString r;
            check(jsde_run_scenario(m.get(), threads, &r.p));
            emit(out, r.str());
            return kOk;
        }
    } catch (const Failure& f) {
        return f.code;
    } catch (const std::exception& e) {
        std::cerr << "jsde: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
