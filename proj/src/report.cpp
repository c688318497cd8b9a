#include "jsde/report.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "jsde/error.hpp"

namespace jsde::report {
namespace {

json witness_json(const std::optional<Witness>& w) {
    if (!w) return nullptr;
    return {{"t", w->t}, {"x", w->x}, {"x_prime", w->x_prime}, {"lhs", w->lhs}, {"rhs", w->rhs}};
}

json series(const std::vector<double>& v) { return json(v); }

CouplingOptions coupling_options(const config::ModelConfig& cfg, const RunOptions& opt) {
    const auto& e = cfg.experiment;
    CouplingOptions o;
    o.x0_a = e.x0 + e.gap;
    o.x0_b = e.x0;
    o.horizon = e.horizon;
    o.step = e.step;
    o.eps = e.eps;
    o.n_paths = e.paths;
    o.seed0 = e.seed;
    o.psi_n = e.psi_n;
    o.threads = opt.threads;
    o.cache = opt.cache;
    o.scenario = cfg.name;
    return o;
}

// Size of the gap jump at every event: the applied increments of the two
// solutions differ by exactly this amount.
json event_gap_jumps(const CouplingData& data) {
    std::size_t events = 0, nonzero = 0;
    double worst = 0.0;
    bool big_transparent = true;
    for (const auto& p : data.pairs) {
        for (std::size_t j = 0; j < p.a.jumps.size() && j < p.b.jumps.size(); ++j) {
            const double d = p.a.jumps[j].increment - p.b.jumps[j].increment;
            ++events;
            if (d != 0.0) {
                ++nonzero;
                if (p.a.jumps[j].big) big_transparent = false;
            }
            worst = std::max(worst, std::abs(d));
        }
    }
    return {{"events", events},
            {"nonzero", nonzero},
            {"max_abs_increment_difference", worst},
            {"zero_at_every_event", nonzero == 0},
            {"big_jumps_transparent", big_transparent}};
}

json couple_section(const config::ModelConfig& cfg, const RunOptions& opt, const ConditionReport& gate) {
    CouplingOptions o = coupling_options(cfg, opt);
    o.gate_verdict = gate.gate;
    // Paths are kept for the per-event gap check; the psi sequence only when
    // the Gronwall diagnostic runs.
    std::shared_ptr<const ApproximationSequence> seq;
    if (opt.gronwall && !o.psi_n.empty()) {
        const int nmax = *std::max_element(o.psi_n.begin(), o.psi_n.end());
        seq = std::make_shared<const ApproximationSequence>(ApproximationSequence::build(cfg.model.modulus, nmax));
        o.sequence = seq;
    }
    const CouplingData data = couple_paths(cfg.model, o);
    json out = to_json(data.report);
    if (seq) {
        json g = json::array();
        for (int n : o.psi_n) g.push_back(to_json(gronwall_diagnostic(cfg.model, data, *seq, n)));
        out["gronwall"] = g;
    }
    out["event_gap_jumps"] = event_gap_jumps(data);
    return out;
}

// ---- schema validation -------------------------------------------------

using Pred = std::function<bool(const json&)>;

bool is_num(const json& j) { return j.is_number() || j.is_null(); }  // null encodes inf / NaN
bool is_count(const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0); }
bool is_num_array(const json& j) {
    if (!j.is_array()) return false;
    return std::all_of(j.begin(), j.end(), is_num);
}

void need(const json& j, const std::string& ptr, const char* key, const Pred& ok, const char* what) {
    if (!j.is_object()) throw ConfigError(ptr, "expected an object");
    if (!j.contains(key)) throw ConfigError(ptr + "/" + key, "missing member");
    if (!ok(j.at(key))) throw ConfigError(ptr + "/" + key, std::string("expected ") + what);
}

void need_num(const json& j, const std::string& p, const char* k) { need(j, p, k, is_num, "a number"); }
void need_bool(const json& j, const std::string& p, const char* k) {
    need(j, p, k, [](const json& v) { return v.is_boolean(); }, "a boolean");
}
void need_count(const json& j, const std::string& p, const char* k) { need(j, p, k, is_count, "a count"); }
void need_str(const json& j, const std::string& p, const char* k) {
    need(j, p, k, [](const json& v) { return v.is_string(); }, "a string");
}
void need_series(const json& j, const std::string& p, const char* k, std::size_t len) {
    need(j, p, k, is_num_array, "an array of numbers");
    if (j.at(k).size() != len) throw ConfigError(p + "/" + k, "length differs from the time grid");
}

void validate_check(const json& j, const std::string& p) {
    need_bool(j, p, "gate");
    need(j, p, "entries", [](const json& v) { return v.is_array(); }, "an array");
    need(j, p, "sample", [](const json& v) { return v.is_object(); }, "an object");
    const std::set<std::string> verdicts{"pass", "fail", "inconclusive"};
    for (std::size_t i = 0; i < j["entries"].size(); ++i) {
        const json& e = j["entries"][i];
        const std::string q = p + "/entries/" + std::to_string(i);
        need_str(e, q, "name");
        need(e, q, "verdict", [&](const json& v) { return v.is_string() && verdicts.count(v.get<std::string>()); },
             "pass, fail or inconclusive");
        need_num(e, q, "margin");
        need_num(e, q, "worst");
        need_bool(e, q, "equality");
        need_bool(e, q, "informational");
        need_str(e, q, "note");
        need(e, q, "witness", [](const json& v) { return v.is_null() || v.is_object(); }, "an object or null");
        if (e["witness"].is_object()) {
            for (const char* k : {"t", "x", "x_prime", "lhs", "rhs"}) need_num(e["witness"], q + "/witness", k);
        }
    }
}

void validate_gronwall(const json& g, const std::string& p) {
    need(g, p, "n", is_count, "a level");
    for (const char* k : {"c1", "c2", "max_violation", "max_violation_in_se"}) need_num(g, p, k);
    need_bool(g, p, "within_noise");
    need_str(g, p, "constants_note");
    need(g, p, "times", is_num_array, "an array of numbers");
    const std::size_t nt = g["times"].size();
    for (const char* k : {"lhs", "rhs", "excess", "excess_std_err"}) need_series(g, p, k, nt);
    need(g, p, "terms", [](const json& v) { return v.is_object(); }, "an object");
    for (const char* k : {"drift", "drift_bound", "diffusion", "diffusion_bound", "jump", "jump_bound"}) {
        need_series(g["terms"], p + "/terms", k, nt);
    }
}

void validate_couple(const json& j, const std::string& p) {
    need(j, p, "times", is_num_array, "an array of numbers");
    const std::size_t nt = j["times"].size();
    need_series(j, p, "mean_abs_gap", nt);
    need_series(j, p, "std_err", nt);
    need(j, p, "psi_gap", [](const json& v) { return v.is_array(); }, "an array");
    for (std::size_t i = 0; i < j["psi_gap"].size(); ++i) {
        const std::string q = p + "/psi_gap/" + std::to_string(i);
        need(j["psi_gap"][i], q, "n", is_count, "a level");
        need_series(j["psi_gap"][i], q, "mean", nt);
        need_series(j["psi_gap"][i], q, "std_err", nt);
    }
    need(j, p, "quantile_levels", is_num_array, "an array of numbers");
    need_series(j, p, "terminal_gap_quantiles", j["quantile_levels"].size());
    for (const char* k : {"n_paths", "n_used", "n_excluded"}) need_count(j, p, k);
    need_bool(j, p, "valid");
    need(j, p, "seeds", [](const json& v) { return v.is_object(); }, "an object");
    need_count(j["seeds"], p + "/seeds", "first");
    need_count(j["seeds"], p + "/seeds", "last");
    for (const char* k : {"x0_a", "x0_b", "horizon", "step", "eps"}) need_num(j, p, k);
    need_str(j, p, "scenario");
    need(j, p, "gate_verdict", [](const json& v) { return v.is_null() || v.is_boolean(); }, "a boolean or null");
    if (j.contains("gronwall")) {
        need(j, p, "gronwall", [](const json& v) { return v.is_array(); }, "an array");
        for (std::size_t i = 0; i < j["gronwall"].size(); ++i) {
            validate_gronwall(j["gronwall"][i], p + "/gronwall/" + std::to_string(i));
        }
    }
}

void validate_shrink(const json& j, const std::string& p) {
    need(j, p, "rows", [](const json& v) { return v.is_array() && !v.empty(); }, "a nonempty array");
    for (std::size_t i = 0; i < j["rows"].size(); ++i) {
        const std::string q = p + "/rows/" + std::to_string(i);
        for (const char* k : {"delta", "mean_abs_gap_T", "std_err_T", "ratio", "normalized"}) need_num(j["rows"][i], q, k);
        need_count(j["rows"][i], q, "n_excluded");
    }
    need_num(j, p, "spearman");
    need_num(j, p, "gronwall_rate");
    need_bool(j, p, "strictly_decreasing");
    need_bool(j, p, "valid");
}

void validate_kind(const json& j, const std::string& p, const char* kind) {
    need(j, p, "kind", [&](const json& v) { return v == kind; }, kind);
}

}  // namespace

json to_json(const ConditionReport& r, const SampleSpec& spec) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        entries.push_back({{"name", e.name},
                           {"verdict", to_string(e.verdict)},
                           {"margin", e.margin},
                           {"worst", e.worst},
                           {"equality", e.equality},
                           {"informational", e.informational},
                           {"note", e.note},
                           {"witness", witness_json(e.witness)}});
    }
    json failing = r.failing();
    return {{"kind", "check"},
            {"gate", r.gate},
            {"failing", failing},
            {"entries", entries},
            {"sample",
             {{"t", {spec.t_lo, spec.t_hi, spec.nt}},
              {"x", {spec.x_lo, spec.x_hi, spec.nx}},
              {"rel_tol", spec.rel_tol},
              {"divergence_eps", spec.divergence_eps},
              {"divergence_cap", spec.divergence_cap},
              {"divergence_plateau", spec.divergence_plateau}}},
            {"note", "grid sampling: pass means no violation was found on the sampled grid"}};
}

json to_json(const CouplingReport& r) {
    json psi = json::array();
    for (const auto& s : r.psi_gap) psi.push_back({{"n", s.n}, {"mean", series(s.mean)}, {"std_err", series(s.std_err)}});
    json gate = r.gate_verdict ? json(*r.gate_verdict) : json(nullptr);
    return {{"kind", "couple"},
            {"scenario", r.scenario},
            {"gate_verdict", gate},
            {"x0_a", r.x0_a},
            {"x0_b", r.x0_b},
            {"horizon", r.horizon},
            {"step", r.step},
            {"eps", r.eps},
            {"n_paths", r.n_paths},
            {"n_used", r.n_used},
            {"n_excluded", r.n_excluded},
            {"valid", r.valid()},
            {"seeds", {{"first", r.seed0}, {"last", r.seed0 + r.n_paths - 1}}},
            {"times", series(r.times)},
            {"mean_abs_gap", series(r.mean_abs_gap)},
            {"std_err", series(r.std_err)},
            {"psi_gap", psi},
            {"quantile_levels", series(r.quantile_levels)},
            {"terminal_gap_quantiles", series(r.terminal_gap_quantiles)}};
}

json to_json(const ShrinkReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"delta", row.delta},
                        {"mean_abs_gap_T", row.mean_abs_gap_T},
                        {"std_err_T", row.std_err_T},
                        {"ratio", row.ratio},
                        {"normalized", row.normalized},
                        {"n_excluded", row.n_excluded}});
    }
    return {{"kind", "shrink"},
            {"rows", rows},
            {"spearman", r.spearman},
            {"strictly_decreasing", r.strictly_decreasing},
            {"gronwall_rate", r.gronwall_rate},
            {"valid", r.valid}};
}

json to_json(const GronwallDiagnostic& g) {
    return {{"n", g.n},
            {"c1", g.c1},
            {"c2", g.c2},
            {"constants_note",
             "c1 = 2K reads the drift and small-jump Lipschitz bounds as K each; c2 = 1 is the diffusion bound t/n"},
            {"times", series(g.times)},
            {"lhs", series(g.lhs)},
            {"rhs", series(g.rhs)},
            {"excess", series(g.excess)},
            {"excess_std_err", series(g.excess_std_err)},
            {"max_violation", g.max_violation},
            {"max_violation_in_se", g.max_violation_in_se},
            {"within_noise", g.within_noise},
            {"terms",
             {{"drift", series(g.drift_term)},
              {"drift_bound", series(g.drift_bound)},
              {"diffusion", series(g.diffusion_term)},
              {"diffusion_bound", series(g.diffusion_bound)},
              {"jump", series(g.jump_term)},
              {"jump_bound", series(g.jump_bound)}}}};
}

json run_check(const config::ModelConfig& cfg, const RunOptions& opt) {
    const SampleSpec spec = config::sample_spec(cfg, opt.threads);
    json out = to_json(theorem1_gate(cfg.model, spec), spec);
    out["model"] = cfg.name;
    return out;
}

json run_couple(const config::ModelConfig& cfg, const RunOptions& opt) {
    const ConditionReport gate = theorem1_gate(cfg.model, config::sample_spec(cfg, opt.threads));
    return couple_section(cfg, opt, gate);
}

json run_shrink(const config::ModelConfig& cfg, const RunOptions& opt) {
    CouplingOptions o = coupling_options(cfg, opt);
    json out = to_json(shrink_study(cfg.model, cfg.experiment.x0, cfg.experiment.gaps, o));
    out["base_x0"] = cfg.experiment.x0;
    out["n_paths"] = cfg.experiment.paths;
    return out;
}

json run_scenario(const config::ModelConfig& cfg, const RunOptions& opt) {
    const SampleSpec spec = config::sample_spec(cfg, opt.threads);
    const ConditionReport gate = theorem1_gate(cfg.model, spec);
    json check = to_json(gate, spec);
    json coupling = couple_section(cfg, opt, gate);
    json shrink = run_shrink(cfg, opt);

    bool gronwall_ok = true;
    if (coupling.contains("gronwall")) {
        for (const auto& g : coupling["gronwall"]) gronwall_ok = gronwall_ok && g["within_noise"].get<bool>();
    }
    json summary = {{"gate", gate.gate},
                    {"failing", gate.failing()},
                    {"terminal_mean_abs_gap", coupling["mean_abs_gap"].back()},
                    {"coupling_valid", coupling["valid"]},
                    {"shrink_spearman", shrink["spearman"]},
                    {"shrink_strictly_decreasing", shrink["strictly_decreasing"]},
                    {"gronwall_within_noise", gronwall_ok}};
    if (coupling.contains("event_gap_jumps")) {
        summary["gap_continuous_at_events"] = coupling["event_gap_jumps"]["zero_at_every_event"];
    }
    return {{"kind", "scenario"},
            {"scenario", cfg.name},
            {"description", cfg.description},
            {"demonstration_only", cfg.demonstration_only},
            {"config", cfg.source},
            {"summary", summary},
            {"check", check},
            {"couple", coupling},
            {"shrink", shrink},
            {"metadata", {{"threads", opt.threads}}}};
}

std::string coupling_csv(const json& r) {
    std::string out = "time,mean_abs_gap,std_err";
    for (const auto& s : r["psi_gap"]) out += ",psi_" + std::to_string(s["n"].get<int>());
    out += "\n";
    char buf[64];
    auto num = [&](const json& v) {
        if (v.is_null()) return std::string("nan");
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return std::string(buf);
    };
    for (std::size_t i = 0; i < r["times"].size(); ++i) {
        out += num(r["times"][i]) + "," + num(r["mean_abs_gap"][i]) + "," + num(r["std_err"][i]);
        for (const auto& s : r["psi_gap"]) out += "," + num(s["mean"][i]);
        out += "\n";
    }
    return out;
}

void validate(const json& j) {
    need(j, "", "kind", [](const json& v) { return v.is_string(); }, "a string");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "check") {
        validate_check(j, "");
    } else if (kind == "couple") {
        validate_couple(j, "");
    } else if (kind == "shrink") {
        validate_shrink(j, "");
    } else if (kind == "scenario") {
        need_str(j, "", "scenario");
        need_bool(j, "", "demonstration_only");
        need(j, "", "summary", [](const json& v) { return v.is_object(); }, "an object");
        need(j, "", "config", [](const json& v) { return v.is_object(); }, "an object");
        try {
            config::parse(j["config"]);
        } catch (const ConfigError& e) {
            throw ConfigError("/config" + e.pointer(), e.message());
        }
        validate_kind(j["check"], "/check", "check");
        validate_check(j["check"], "/check");
        validate_kind(j["couple"], "/couple", "couple");
        validate_couple(j["couple"], "/couple");
        validate_kind(j["shrink"], "/shrink", "shrink");
        validate_shrink(j["shrink"], "/shrink");
    } else {
        throw ConfigError("/kind", "unknown report kind '" + kind + "'");
    }
}

}  // namespace jsde::report
