#include <doctest.h>

#include <cmath>
#include <string>

#include "jsde/config.hpp"
#include "jsde/error.hpp"
#include "jsde/report.hpp"

using namespace jsde;
using config::json;

namespace {

std::string pointer_of(const json& doc) {
    try {
        config::parse(doc);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<accepted>";
}

json base() { return config::scenario_document("cir-stable"); }

}  // namespace

TEST_CASE("every built-in scenario parses and normalizes to a fixed point") {
    for (const auto& name : config::scenario_names()) {
        CAPTURE(name);
        const auto cfg = config::parse(config::scenario_document(name));
        CHECK(cfg.name == name);
        const auto again = config::parse(cfg.source);
        CHECK(again.source == cfg.source);
    }
    CHECK_THROWS_AS(config::scenario_document("no-such"), ConfigError);
}

TEST_CASE("an empty document gives the default model") {
    const auto cfg = config::parse(json::object());
    CHECK(cfg.experiment.paths == 1000);
    CHECK(cfg.experiment.gaps == std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4});
    CHECK(cfg.source.contains("modulus"));
}

TEST_CASE("unknown and malformed keys are reported with a JSON pointer") {
    json d = base();
    d["bogus"] = 1;
    CHECK(pointer_of(d) == "/bogus");

    d = base();
    d["levy"]["scal"] = 1;
    CHECK(pointer_of(d) == "/levy/scal");

    d = base();
    d["levy"]["alpha"] = "half";
    CHECK(pointer_of(d) == "/levy/alpha");

    d = base();
    d["sigma"]["type"] = "cubic";
    CHECK(pointer_of(d).rfind("/sigma", 0) == 0);

    d = base();
    d["experiment"]["step"] = -1;
    CHECK(pointer_of(d) == "/experiment/step");

    d = base();
    d["experiment"]["gaps"] = {1e-2, 1e-1};
    CHECK(pointer_of(d) == "/experiment/gaps/1");

    d = base();
    d["experiment"]["eps"] = 5.0;
    CHECK(pointer_of(d) == "/experiment/eps");

    d = base();
    d["modulus"]["family"] = "log";
    CHECK(pointer_of(d) == "/modulus/family");

    d = base();
    d["levy"] = {{"family", "finite_atoms"}, {"atoms", {{0.5, -1.0}}}};
    CHECK(pointer_of(d).rfind("/levy/atoms", 0) == 0);

    CHECK_THROWS_AS(config::parse_text("{ not json"), ConfigError);
}

TEST_CASE("modulus spec strings") {
    const Modulus a = config::parse_modulus_spec("power:0.5");
    CHECK(a(0.25) == doctest::Approx(0.5));
    const Modulus b = config::parse_modulus_spec("power:0.5:2");
    CHECK(b(0.25) == doctest::Approx(1.0));
    const Modulus c = config::parse_modulus_spec("linear:3");
    CHECK(c(0.25) == doctest::Approx(0.75));
    CHECK_THROWS_AS(config::parse_modulus_spec("power"), InvalidArgument);
    CHECK_THROWS_AS(config::parse_modulus_spec("power:-1"), InvalidArgument);
    CHECK_THROWS_AS(config::parse_modulus_spec("cubic"), InvalidArgument);
}

TEST_CASE("check reports re-validate and carry the gate") {
    for (const auto& name : config::scenario_names()) {
        CAPTURE(name);
        const auto cfg = config::parse(config::scenario_document(name));
        const json r = report::run_check(cfg, {});
        CHECK_NOTHROW(report::validate(r));
        CHECK_NOTHROW(report::validate(json::parse(r.dump())));
        CHECK(r["gate"].get<bool>() == (name != "bass-alpha-big" && name != "nonunique-demo"));
    }
}

TEST_CASE("pure-diffusion check: jump entries pass trivially") {
    const auto cfg = config::parse(config::scenario_document("pure-diffusion-yw"));
    const json r = report::run_check(cfg, {});
    int seen = 0;
    for (const auto& e : r["entries"]) {
        const std::string n = e["name"];
        if (n == "jump_lipschitz" || n == "summability" || n == "weak_l2") {
            CHECK(e["verdict"] == "pass");
            ++seen;
        }
    }
    CHECK(seen == 3);
}

TEST_CASE("couple, shrink and scenario reports re-validate; tampering is caught") {
    json d = config::scenario_document("cir-stable");
    d["experiment"]["paths"] = 20;
    const auto cfg = config::parse(d);

    const json c = report::run_couple(cfg, {});
    CHECK_NOTHROW(report::validate(json::parse(c.dump())));
    const std::string csv = report::coupling_csv(c);
    CHECK(csv.rfind("time,mean_abs_gap,std_err,psi_1,psi_2,psi_5\n", 0) == 0);

    const json s = report::run_shrink(cfg, {});
    CHECK_NOTHROW(report::validate(s));

    json sc = report::run_scenario(cfg, {});
    CHECK_NOTHROW(report::validate(json::parse(sc.dump())));
    CHECK(sc["metadata"]["threads"] == 1);

    json bad = c;
    bad["mean_abs_gap"].erase(0);
    CHECK_THROWS_AS(report::validate(bad), ConfigError);

    bad = sc;
    bad["config"]["levy"]["alpha"] = 7;
    try {
        report::validate(bad);
        FAIL("tampered config accepted");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/config/levy/alpha");
    }

    bad = c;
    bad["kind"] = "mystery";
    CHECK_THROWS_AS(report::validate(bad), ConfigError);
}
