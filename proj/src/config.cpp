#include "jsde/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "jsde/error.hpp"

namespace jsde::config {
namespace {

std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

// Read access to one JSON object; rejects keys outside the allowed set.
class Object {
public:
    Object(const json& j, std::string pointer, std::initializer_list<const char*> allowed)
        : j_(j), ptr_(std::move(pointer)) {
        if (!j.is_object()) throw ConfigError(ptr_, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& item : j.items()) {
            if (!ok.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
        }
    }

    std::string at(const std::string& key) const { return ptr_ + "/" + escape(key); }
    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const { return j_.at(key); }

    double number(const char* key) const {
        if (!has(key)) throw ConfigError(at(key), "missing required key");
        return number_at(key);
    }
    double number(const char* key, double fallback) const { return has(key) ? number_at(key) : fallback; }
    double positive(const char* key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw ConfigError(at(key), "must be positive");
        return v;
    }
    double nonnegative(const char* key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v >= 0.0)) throw ConfigError(at(key), "must be nonnegative");
        return v;
    }
    std::int64_t integer(const char* key, std::int64_t fallback, std::int64_t min) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < min) throw ConfigError(at(key), "must be at least " + std::to_string(min));
        return x;
    }
    std::string string(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_string()) throw ConfigError(at(key), "expected a string");
        return j_.at(key).get<std::string>();
    }
    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(at(key), "expected a boolean");
        return j_.at(key).get<bool>();
    }

private:
    double number_at(const char* key) const {
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
        return x;
    }

    const json& j_;
    std::string ptr_;
};

std::string type_of(const json& j, const std::string& ptr, const char* field = "type") {
    if (!j.is_object()) throw ConfigError(ptr, "expected an object");
    if (!j.contains(field)) throw ConfigError(ptr + "/" + field, "missing required key");
    if (!j.at(field).is_string()) throw ConfigError(ptr + "/" + field, "expected a string");
    return j.at(field).get<std::string>();
}

double clamp_affine(double a, double b, double lo, double hi, double x) { return std::clamp(a + b * x, lo, hi); }

struct Clamp {
    double intercept, slope, lo, hi;
};

Clamp parse_clamp(const Object& o) {
    Clamp c{o.number("intercept", 0.0), o.number("slope", 0.0), o.number("lo", -std::numeric_limits<double>::max()),
            o.number("hi", std::numeric_limits<double>::max())};
    if (!(c.lo <= c.hi)) throw ConfigError(o.at("hi"), "must not be below lo");
    return c;
}

json clamp_json(const char* type, const Clamp& c) {
    return {{"type", type}, {"intercept", c.intercept}, {"slope", c.slope}, {"lo", c.lo}, {"hi", c.hi}};
}

json parse_drift(const json& j, const std::string& ptr, JumpSDEModel& m, double& lipschitz) {
    const std::string type = type_of(j, ptr);
    if (type != "affine") throw ConfigError(ptr + "/type", "unknown drift type '" + type + "'");
    Object o(j, ptr, {"type", "constant", "linear"});
    const double a = o.number("constant", 0.0), b = o.number("linear", 0.0);
    m.drift = [a, b](double, double x) { return a + b * x; };
    lipschitz = std::abs(b);
    return {{"type", "affine"}, {"constant", a}, {"linear", b}};
}

json parse_sigma(const json& j, const std::string& ptr, JumpSDEModel& m) {
    const std::string type = type_of(j, ptr);
    if (type == "constant") {
        Object o(j, ptr, {"type", "value"});
        const double v = o.number("value", 0.0);
        m.diffusion = [v](double, double) { return v; };
        return {{"type", type}, {"value", v}};
    }
    if (type == "sqrt") {
        Object o(j, ptr, {"type", "scale"});
        const double s = o.number("scale", 1.0);
        m.diffusion = [s](double, double x) { return s * std::sqrt(std::max(x, 0.0)); };
        return {{"type", type}, {"scale", s}};
    }
    if (type == "power") {
        Object o(j, ptr, {"type", "scale", "gamma"});
        const double s = o.number("scale", 1.0);
        const double g = o.positive("gamma", 0.5);
        m.diffusion = [s, g](double, double x) { return s * std::pow(std::abs(x), g); };
        return {{"type", type}, {"scale", s}, {"gamma", g}};
    }
    throw ConfigError(ptr + "/type", "unknown sigma type '" + type + "'");
}

json parse_f2(const json& j, const std::string& ptr, JumpSDEModel& m) {
    const std::string type = type_of(j, ptr);
    if (type == "zero") {
        Object o(j, ptr, {"type"});
        m.small_jump = [](double, double, double) { return 0.0; };
        m.small_jump_factor = [](double, double) { return 0.0; };
        m.f2_state_independent = true;
        return {{"type", type}};
    }
    if (type == "state_linear") {
        Object o(j, ptr, {"type", "intercept", "slope", "lo", "hi"});
        const Clamp c = parse_clamp(o);
        m.small_jump_factor = [c](double, double x) { return clamp_affine(c.intercept, c.slope, c.lo, c.hi, x); };
        m.small_jump = [c](double, double x, double y) { return clamp_affine(c.intercept, c.slope, c.lo, c.hi, x) * y; };
        m.f2_state_independent = c.slope == 0.0;
        return clamp_json("state_linear", c);
    }
    if (type == "time_linear") {
        Object o(j, ptr, {"type", "constant", "linear"});
        const double a = o.number("constant", 0.0), b = o.number("linear", 0.0);
        m.small_jump_factor = [a, b](double t, double) { return a + b * t; };
        m.small_jump = [a, b](double t, double, double y) { return (a + b * t) * y; };
        m.f2_state_independent = true;
        return {{"type", type}, {"constant", a}, {"linear", b}};
    }
    throw ConfigError(ptr + "/type", "unknown f2 type '" + type + "'");
}

json parse_f1(const json& j, const std::string& ptr, JumpSDEModel& m) {
    const std::string type = type_of(j, ptr);
    if (type == "zero") {
        Object o(j, ptr, {"type"});
        m.big_jump = [](double, double, double) { return 0.0; };
        return {{"type", type}};
    }
    if (type == "shift") {
        Object o(j, ptr, {"type"});
        m.big_jump = [](double, double, double y) { return y; };
        return {{"type", type}};
    }
    if (type == "state_linear") {
        Object o(j, ptr, {"type", "intercept", "slope", "lo", "hi"});
        const Clamp c = parse_clamp(o);
        m.big_jump = [c](double, double x, double y) { return clamp_affine(c.intercept, c.slope, c.lo, c.hi, x) * y; };
        return clamp_json("state_linear", c);
    }
    throw ConfigError(ptr + "/type", "unknown f1 type '" + type + "'");
}

json parse_levy(const json& j, const std::string& ptr, LevyMeasure& out) {
    const std::string family = type_of(j, ptr, "family");
    try {
        if (family == "stable") {
            Object o(j, ptr, {"family", "alpha", "scale"});
            const double a = o.number("alpha"), s = o.positive("scale", 1.0);
            if (!(a > 0.0 && a < 2.0)) throw ConfigError(o.at("alpha"), "must lie in (0, 2)");
            out = LevyMeasure::stable(a, s);
            return {{"family", family}, {"alpha", a}, {"scale", s}};
        }
        if (family == "tempered_stable") {
            Object o(j, ptr, {"family", "alpha", "scale", "tempering"});
            const double a = o.number("alpha"), s = o.positive("scale", 1.0), l = o.positive("tempering", 1.0);
            if (!(a > 0.0 && a < 2.0)) throw ConfigError(o.at("alpha"), "must lie in (0, 2)");
            out = LevyMeasure::tempered_stable(a, s, l);
            return {{"family", family}, {"alpha", a}, {"scale", s}, {"tempering", l}};
        }
        if (family == "finite_atoms") {
            Object o(j, ptr, {"family", "atoms"});
            std::vector<Atom> atoms;
            json norm = json::array();
            if (o.has("atoms")) {
                const json& list = o.raw("atoms");
                if (!list.is_array()) throw ConfigError(o.at("atoms"), "expected an array of [position, mass]");
                for (std::size_t i = 0; i < list.size(); ++i) {
                    const std::string p = o.at("atoms") + "/" + std::to_string(i);
                    const json& a = list[i];
                    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
                        throw ConfigError(p, "expected [position, mass]");
                    }
                    const double y = a[0].get<double>(), w = a[1].get<double>();
                    if (!(y != 0.0) || !std::isfinite(y)) throw ConfigError(p + "/0", "position must be finite and nonzero");
                    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError(p + "/1", "mass must be finite and nonnegative");
                    atoms.push_back({y, w});
                    norm.push_back({y, w});
                }
            }
            out = LevyMeasure::finite_atoms(std::move(atoms));
            return {{"family", family}, {"atoms", norm}};
        }
        if (family == "zero") {
            Object o(j, ptr, {"family"});
            out = LevyMeasure::zero();
            return {{"family", family}};
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(ptr, e.what());
    }
    throw ConfigError(ptr + "/family", "unknown levy family '" + family + "'");
}

json parse_modulus(const json& j, const std::string& ptr, Modulus& out) {
    const std::string family = type_of(j, ptr, "family");
    if (family == "power") {
        Object o(j, ptr, {"family", "gamma", "scale"});
        const double g = o.positive("gamma", 0.5), s = o.positive("scale", 1.0);
        out = Modulus::power(g, s);
        return {{"family", family}, {"gamma", g}, {"scale", s}};
    }
    if (family == "linear") {
        Object o(j, ptr, {"family", "scale"});
        const double s = o.positive("scale", 1.0);
        out = Modulus::linear(s);
        return {{"family", family}, {"scale", s}};
    }
    throw ConfigError(ptr + "/family", "unknown modulus family '" + family + "'");
}

json parse_domain(const json& j, const std::string& ptr, Domain& d) {
    Object o(j, ptr, {"t_max", "x_lo", "x_hi", "nt", "nx"});
    d.t_max = o.nonnegative("t_max", d.t_max);
    d.x_lo = o.number("x_lo", d.x_lo);
    d.x_hi = o.number("x_hi", d.x_hi);
    if (!(d.x_lo < d.x_hi)) throw ConfigError(o.at("x_hi"), "must exceed x_lo");
    d.nt = static_cast<int>(o.integer("nt", d.nt, 1));
    d.nx = static_cast<int>(o.integer("nx", d.nx, 2));
    return {{"t_max", d.t_max}, {"x_lo", d.x_lo}, {"x_hi", d.x_hi}, {"nt", d.nt}, {"nx", d.nx}};
}

json experiment_json(const Experiment& e) {
    return {{"x0", e.x0},       {"gap", e.gap},     {"horizon", e.horizon}, {"step", e.step},
            {"eps", e.eps},     {"paths", e.paths}, {"gaps", e.gaps},       {"psi_n", e.psi_n},
            {"seed", e.seed}};
}

}  // namespace

Experiment parse_experiment(const json& j, const std::string& ptr, const Experiment& defaults) {
    Object o(j, ptr, {"x0", "gap", "horizon", "step", "eps", "paths", "gaps", "psi_n", "seed"});
    Experiment e = defaults;
    e.x0 = o.number("x0", e.x0);
    e.gap = o.nonnegative("gap", e.gap);
    e.horizon = o.positive("horizon", e.horizon);
    e.step = o.positive("step", e.step);
    e.eps = o.positive("eps", e.eps);
    e.paths = static_cast<std::size_t>(o.integer("paths", static_cast<std::int64_t>(e.paths), 1));
    if (o.has("seed")) {
        const json& s = o.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            throw ConfigError(o.at("seed"), "expected a nonnegative integer");
        }
        e.seed = s.get<std::uint64_t>();
    }
    if (o.has("gaps")) {
        const json& g = o.raw("gaps");
        if (!g.is_array() || g.empty()) throw ConfigError(o.at("gaps"), "expected a nonempty array of numbers");
        e.gaps.clear();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::string p = o.at("gaps") + "/" + std::to_string(i);
            if (!g[i].is_number()) throw ConfigError(p, "expected a number");
            const double d = g[i].get<double>();
            if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError(p, "must be finite and nonnegative");
            if (i > 0 && !(d < e.gaps.back())) throw ConfigError(p, "gaps must be strictly decreasing");
            e.gaps.push_back(d);
        }
    }
    if (o.has("psi_n")) {
        const json& g = o.raw("psi_n");
        if (!g.is_array()) throw ConfigError(o.at("psi_n"), "expected an array of integers");
        e.psi_n.clear();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::string p = o.at("psi_n") + "/" + std::to_string(i);
            if (!g[i].is_number_integer() || g[i].get<std::int64_t>() < 1 || g[i].get<std::int64_t>() > 200) {
                throw ConfigError(p, "expected an integer in [1, 200]");
            }
            e.psi_n.push_back(g[i].get<int>());
        }
    }
    return e;
}

ModelConfig parse(const json& doc) {
    Object o(doc, "", {"name", "description", "demonstration_only", "drift", "sigma", "f1", "f2", "cutoff_c", "levy",
                       "modulus", "K", "domain", "experiment"});
    ModelConfig cfg;
    cfg.name = o.string("name", "model");
    cfg.description = o.string("description", "");
    cfg.demonstration_only = o.boolean("demonstration_only", false);
    JumpSDEModel& m = cfg.model;
    m.name = cfg.name;

    static const json kZero = {{"type", "zero"}};
    static const json kNoJumps = {{"family", "zero"}};
    double drift_lipschitz = 0.0;
    const json drift = parse_drift(o.has("drift") ? o.raw("drift") : json{{"type", "affine"}}, o.at("drift"), m,
                                   drift_lipschitz);
    const json sigma = parse_sigma(o.has("sigma") ? o.raw("sigma") : json{{"type", "constant"}}, o.at("sigma"), m);
    const json f1 = parse_f1(o.has("f1") ? o.raw("f1") : kZero, o.at("f1"), m);
    const json f2 = parse_f2(o.has("f2") ? o.raw("f2") : kZero, o.at("f2"), m);
    m.cutoff_c = o.positive("cutoff_c", 1.0);
    const json levy = parse_levy(o.has("levy") ? o.raw("levy") : kNoJumps, o.at("levy"), m.levy);
    const json modulus = parse_modulus(o.has("modulus") ? o.raw("modulus") : json{{"family", "power"}},
                                       o.at("modulus"), m.modulus);
    m.lipschitz_K = o.nonnegative("K", drift_lipschitz);
    const json domain = parse_domain(o.has("domain") ? o.raw("domain") : json::object(), o.at("domain"), cfg.domain);
    cfg.experiment =
        parse_experiment(o.has("experiment") ? o.raw("experiment") : json::object(), o.at("experiment"), Experiment{});
    if (!(cfg.experiment.eps < m.cutoff_c)) {
        throw ConfigError(o.at("experiment") + "/eps", "must be below cutoff_c");
    }

    cfg.source = {{"name", cfg.name},     {"description", cfg.description},
                  {"demonstration_only", cfg.demonstration_only},
                  {"drift", drift},       {"sigma", sigma},
                  {"f1", f1},             {"f2", f2},
                  {"cutoff_c", m.cutoff_c}, {"levy", levy},
                  {"modulus", modulus},   {"K", m.lipschitz_K},
                  {"domain", domain},     {"experiment", experiment_json(cfg.experiment)}};
    return cfg;
}

ModelConfig parse_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse(doc);
}

SampleSpec sample_spec(const ModelConfig& cfg, unsigned threads) {
    SampleSpec s;
    s.t_lo = 0.0;
    s.t_hi = cfg.domain.t_max;
    s.nt = cfg.domain.nt;
    s.x_lo = cfg.domain.x_lo;
    s.x_hi = cfg.domain.x_hi;
    s.nx = cfg.domain.nx;
    s.threads = threads;
    return s;
}

Modulus parse_modulus_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    auto number = [&](std::size_t i) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(parts[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != parts[i].size() || !(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("modulus spec '" + spec + "': '" + parts[i] + "' is not a positive number");
        }
        return v;
    };
    if (parts[0] == "power" && (parts.size() == 2 || parts.size() == 3)) {
        return Modulus::power(number(1), parts.size() == 3 ? number(2) : 1.0);
    }
    if (parts[0] == "linear" && parts.size() <= 2) return Modulus::linear(parts.size() == 2 ? number(1) : 1.0);
    throw InvalidArgument("modulus spec '" + spec + "': expected power:GAMMA[:SCALE] or linear[:SCALE]");
}

std::vector<std::string> scenario_names() {
    return {"pure-diffusion-yw", "cir-stable", "additive-jumps", "bass-alpha-big", "nonunique-demo"};
}

json scenario_document(const std::string& name) {
    const json cir_drift = {{"type", "affine"}, {"constant", 1.0}, {"linear", -1.0}};
    const json cir_sigma = {{"type", "sqrt"}, {"scale", 0.5}};
    const json sqrt_modulus = {{"family", "power"}, {"gamma", 0.5}, {"scale", 1.0}};
    const json domain = {{"t_max", 1.0}, {"x_lo", -1.0}, {"x_hi", 3.0}, {"nt", 41}, {"nx", 81}};
    if (name == "pure-diffusion-yw") {
        return {{"name", name},
                {"description", "CIR diffusion without jumps; square-root coefficient, Lipschitz drift"},
                {"drift", cir_drift},
                {"sigma", {{"type", "sqrt"}, {"scale", 1.0}}},
                {"levy", {{"family", "zero"}}},
                {"modulus", sqrt_modulus},
                {"K", 1.0},
                {"domain", domain},
                {"experiment", {{"x0", 0.5}}}};
    }
    if (name == "cir-stable") {
        return {{"name", name},
                {"description", "CIR diffusion with symmetric 0.5-stable jumps scaled by a bounded Lipschitz factor"},
                {"drift", cir_drift},
                {"sigma", cir_sigma},
                {"f2", {{"type", "state_linear"}, {"intercept", 0.0}, {"slope", 0.2}, {"lo", -1.0}, {"hi", 1.0}}},
                {"f1", {{"type", "shift"}}},
                {"cutoff_c", 1.0},
                {"levy", {{"family", "stable"}, {"alpha", 0.5}, {"scale", 1.0}}},
                {"modulus", sqrt_modulus},
                {"K", 1.0},
                {"domain", domain},
                {"experiment", {{"x0", 1.0}}}};
    }
    if (name == "additive-jumps") {
        return {{"name", name},
                {"description", "small jumps that do not depend on the state; the gap process has no jumps"},
                {"drift", cir_drift},
                {"sigma", cir_sigma},
                {"f2", {{"type", "time_linear"}, {"constant", 0.5}, {"linear", 0.5}}},
                {"f1", {{"type", "shift"}}},
                {"cutoff_c", 1.0},
                {"levy", {{"family", "stable"}, {"alpha", 0.5}, {"scale", 1.0}}},
                {"modulus", sqrt_modulus},
                {"K", 1.0},
                {"domain", domain},
                {"experiment", {{"x0", 1.0}, {"paths", 100}}}};
    }
    if (name == "bass-alpha-big") {
        return {{"name", name},
                {"description", "1.5-stable small jumps; the first absolute moment diverges, so summability fails"},
                {"drift", cir_drift},
                {"sigma", cir_sigma},
                {"f2", {{"type", "time_linear"}, {"constant", 0.2}, {"linear", 0.0}}},
                {"f1", {{"type", "shift"}}},
                {"cutoff_c", 1.0},
                {"levy", {{"family", "stable"}, {"alpha", 1.5}, {"scale", 1.0}}},
                {"modulus", sqrt_modulus},
                {"K", 1.0},
                {"domain", domain},
                {"experiment", {{"x0", 1.0}, {"paths", 200}}}};
    }
    if (name == "nonunique-demo") {
        return {{"name", name},
                {"description", "sigma = |x|^0.4 started at 0; outside the square-root modulus class. Demonstration only"},
                {"demonstration_only", true},
                {"drift", {{"type", "affine"}, {"constant", 0.0}, {"linear", 0.0}}},
                {"sigma", {{"type", "power"}, {"scale", 1.0}, {"gamma", 0.4}}},
                {"levy", {{"family", "zero"}}},
                {"modulus", sqrt_modulus},
                {"K", 0.0},
                {"domain", {{"t_max", 1.0}, {"x_lo", -1.0}, {"x_hi", 1.0}, {"nt", 41}, {"nx", 81}}},
                {"experiment", {{"x0", 0.0}, {"paths", 200}}}};
    }
    throw ConfigError("", "unknown scenario '" + name + "'");
}

}  // namespace jsde::config
