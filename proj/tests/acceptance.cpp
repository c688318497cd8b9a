// Acceptance runner: one PASS/FAIL line per criterion, each against its time budget.
// Usage: acceptance [path-to-jsde-cli] [work-dir]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jsde/config.hpp"
#include "jsde/coupling.hpp"
#include "jsde/levy.hpp"
#include "jsde/model.hpp"
#include "jsde/noise.hpp"
#include "jsde/report.hpp"
#include "jsde/solver.hpp"
#include "jsde/yw.hpp"
#include "oracles.hpp"

using namespace jsde;
using config::json;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// 1. Stable band integrals against closed forms.
Outcome levy_oracles() {
    Outcome o;
    double worst = 0.0;
    auto compare = [&](double got, double want, const std::string& label) {
        const double e = oracle::rel_err(got, want);
        worst = std::max(worst, e);
        o.require(e < 1e-8, label + " rel err " + fmt(e));
    };
    auto abs_y = [](double y) { return std::abs(y); };
    auto y2 = [](double y) { return y * y; };
    for (double alpha : {0.1, 0.3, 0.5, 0.75, 0.9}) {
        for (double c : {0.25, 1.0, 3.0}) {
            const auto nu = LevyMeasure::stable(alpha, 1.5);
            const std::string tag = "alpha=" + fmt(alpha) + " c=" + fmt(c);
            compare(band_integral(nu, abs_y, {0.0, c}), oracle::stable_abs_moment(alpha, 1.5, 1.0, 0.0, c),
                    "first moment " + tag);
            compare(band_integral(nu, y2, {0.0, c}), oracle::stable_abs_moment(alpha, 1.5, 2.0, 0.0, c),
                    "second moment " + tag);
            compare(tail_mass(nu, c), 2.0 * 1.5 * std::pow(c, -alpha) / alpha, "tail mass " + tag);
        }
    }
    for (double alpha : {1.2, 1.5, 1.9}) {
        const auto nu = LevyMeasure::stable(alpha, 1.0);
        compare(band_integral(nu, y2, {0.0, 1.0}), oracle::stable_abs_moment(alpha, 1.0, 2.0, 0.0, 1.0),
                "second moment alpha=" + fmt(alpha));
    }
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.05, 0.95), ul(-3.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double alpha = ua(rng), lo = std::pow(10.0, ul(rng)), hi = lo * (1.0 + 10.0 * ua(rng));
        const auto nu = LevyMeasure::stable(alpha, 1.0);
        compare(band_integral(nu, abs_y, {lo, hi}), oracle::stable_abs_moment(alpha, 1.0, 1.0, lo, hi),
                "random band " + std::to_string(i));
    }
    if (o.ok) o.detail = "max rel err " + fmt(worst);
    return o;
}

// 2. Level sequences.
Outcome levels_oracle() {
    Outcome o;
    const auto sq = compute_log_levels(Modulus::power(0.5), 10);
    double worst_sq = 0.0;
    for (int n = 1; n <= 10; ++n) worst_sq = std::max(worst_sq, oracle::rel_err(std::exp(sq[n]), oracle::sqrt_modulus_level(n)));
    o.require(worst_sq < 1e-8, "sqrt levels rel err " + fmt(worst_sq));
    const auto lin = compute_log_levels(Modulus::linear(), 10);
    const auto inv = oracle::linear_modulus_inverse_levels(10);
    double worst_lin = 0.0;
    for (int n = 1; n <= 10; ++n) worst_lin = std::max(worst_lin, oracle::rel_err(1.0 / std::exp(lin[n]), inv[n]));
    o.require(worst_lin < 1e-10, "linear levels rel err " + fmt(worst_lin));
    if (o.ok) o.detail = "sqrt rel err " + fmt(worst_sq) + ", linear rel err " + fmt(worst_lin);
    return o;
}

// 3. psi invariants.
Outcome psi_suite() {
    Outcome o;
    double fd1 = 0.0, fd2 = 0.0;
    std::size_t points = 0;
    for (double gamma : {0.5, 0.75, 1.0}) {
        const Modulus h = gamma == 1.0 ? Modulus::linear() : Modulus::power(gamma);
        const auto seq = ApproximationSequence::build(h, 11);
        for (int n = 1; n <= 10; ++n) {
            const auto c = oracle::check_psi_invariants(seq, n, 10000);
            o.require(c.ok, "gamma=" + fmt(gamma) + " n=" + std::to_string(n) + ": " + c.failure);
            fd1 = std::max(fd1, c.max_fd_prime);
            fd2 = std::max(fd2, c.max_fd_second);
            points += c.points;
        }
    }
    if (o.ok) o.detail = std::to_string(points) + " points, fd err psi' " + fmt(fd1) + ", psi'' " + fmt(fd2);
    return o;
}

std::vector<std::string> gate_failures(const json& doc) {
    const auto cfg = config::parse(doc);
    return theorem1_gate(cfg.model, config::sample_spec(cfg, 1)).failing();
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s.empty() ? "none" : s;
}

// 4. Condition-checker ground truth.
Outcome gate_ground_truth() {
    Outcome o;
    const auto cir = gate_failures(config::scenario_document("cir-stable"));
    o.require(cir.empty(), "cir-stable fails " + join(cir));

    const auto bass = gate_failures(config::scenario_document("bass-alpha-big"));
    o.require(bass == std::vector<std::string>{"summability"}, "alpha=1.5 fails " + join(bass));

    const std::set<std::string> modulus_entries{"sigma_modulus", "modulus_divergence"};
    auto only_modulus = [&](const std::vector<std::string>& f) {
        return !f.empty() && std::all_of(f.begin(), f.end(), [&](const std::string& s) { return modulus_entries.count(s) > 0; });
    };
    json demo = config::scenario_document("nonunique-demo");
    const auto sqrt_h = gate_failures(demo);
    o.require(only_modulus(sqrt_h), "|x|^0.4 with h=sqrt fails " + join(sqrt_h));
    demo["modulus"] = {{"family", "power"}, {"gamma", 0.4}};
    const auto pow_h = gate_failures(demo);
    o.require(only_modulus(pow_h), "|x|^0.4 with h=u^0.4 fails " + join(pow_h));

    if (o.ok) o.detail = "cir-stable passes; alpha=1.5 fails " + join(bass) + "; |x|^0.4 fails " + join(sqrt_h) +
                         " (h=sqrt) / " + join(pow_h) + " (h=u^0.4)";
    return o;
}

JumpSDEModel cir_stable_model() { return config::parse(config::scenario_document("cir-stable")).model; }

// 5. Solver reductions.
Outcome solver_exactness() {
    Outcome o;
    std::size_t compared = 0;

    // Pure big jumps: the solution is the compound Poisson path itself.
    {
        JumpSDEModel m;
        m.levy = LevyMeasure::stable(0.5);
        m.big_jump = [](double, double, double y) { return y; };
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const NoisePath noise = generate(m.levy, 1.0, 1e-3, 1.0, 1e-3, seed);
            JumpSDEModel big_only = m;
            const SolutionPath p = solve(big_only, noise, 0.0);
            const auto t = p.grid_times();
            const auto v = p.grid_values();
            for (std::size_t i = 0; i < t.size(); ++i) {
                double want = 0.0;
                for (const auto& j : noise.big_jumps) {
                    if (j.time <= t[i]) want += j.mark;
                }
                o.require(v[i] == want, "big-jump path differs at t=" + fmt(t[i]));
                ++compared;
            }
        }
    }
    // Pure Brownian: the solution is x0 plus the cumulative increments.
    {
        JumpSDEModel m;
        m.diffusion = [](double, double) { return 1.0; };
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const NoisePath noise = generate(LevyMeasure::zero(), 1.0, 1e-3, 1.0, 1e-3, seed);
            const auto v = solve(m, noise, 0.0).grid_values();
            double acc = 0.0;
            o.require(v.size() == noise.cell_count() + 1, "grid size");
            for (std::size_t k = 0; k < noise.cell_count() && k + 1 < v.size(); ++k) {
                acc += noise.brownian_increments[k];
                o.require(v[k + 1] == acc, "Brownian path differs at cell " + std::to_string(k));
                ++compared;
            }
        }
    }
    // Restriction before the first big jump equals the small-jump-only solve.
    {
        const JumpSDEModel m = cir_stable_model();
        JumpSDEModel small_only = m;
        small_only.big_jump = [](double, double, double) { return 0.0; };
        int cases = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const NoisePath noise = generate(m.levy, 1.0, 1e-3, m.cutoff_c, 1e-3, seed);
            if (noise.big_jumps.empty()) continue;
            const double t1 = noise.big_jumps.front().time;
            const SolutionPath full = solve(m, noise, 1.0);
            const SolutionPath part = solve(small_only, split_before(noise, t1), 1.0);
            for (std::size_t i = 0; i + 1 < part.times.size(); ++i) {
                o.require(part.times[i] == full.times[i] && part.values[i] == full.values[i],
                          "restricted solve differs, seed " + std::to_string(seed));
                ++compared;
            }
            const auto it = std::find_if(full.jumps.begin(), full.jumps.end(), [](const JumpRecord& j) { return j.big; });
            o.require(it != full.jumps.end() && part.values.back() == it->left_limit,
                      "left limit at the first big jump differs, seed " + std::to_string(seed));
            ++cases;
        }
        o.require(cases >= 20, "too few paths with a big jump");
    }
    if (o.ok) o.detail = std::to_string(compared) + " points equal with zero tolerance";
    return o;
}

// 6. Linear model: deterministic gap contraction.
Outcome linear_coupling() {
    Outcome o;
    JumpSDEModel m;
    m.drift = [](double, double x) { return -x; };
    m.diffusion = [](double, double) { return 0.1; };
    m.modulus = Modulus::linear();
    m.lipschitz_K = 1.0;
    CouplingOptions opt;
    opt.x0_a = 1.0 + 1e-3;
    opt.x0_b = 1.0;
    opt.horizon = 1.0;
    opt.step = 1e-3;
    opt.eps = 1e-3;
    opt.n_paths = 100;
    const auto r = couple(m, opt);
    const double ratio = r.mean_abs_gap.back() / 1e-3;
    const double want = oracle::euler_contraction(1e-3, 1000);
    const double e = oracle::rel_err(ratio, want);
    o.require(e < 1e-6, "E|D_T|/delta = " + fmt(ratio) + " vs " + fmt(want));
    o.require(std::abs(ratio - 0.36770) < 1e-5, "E|D_T|/delta = " + fmt(ratio) + " not 0.36770");
    if (o.ok) o.detail = "E|D_T|/delta = " + fmt(ratio) + ", rel err " + fmt(e);
    return o;
}

// 7. cir-stable shrink study and Gronwall check at the scenario settings.
Outcome uniqueness_shadow() {
    Outcome o;
    const auto cfg = config::parse(config::scenario_document("cir-stable"));
    o.require(cfg.experiment.paths == 1000, "scenario does not use 1000 paths");
    o.require(cfg.experiment.gaps == std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4}, "scenario gaps differ");
    const json s = report::run_shrink(cfg, {1, false, nullptr});
    const double rho = s["spearman"].get<double>();
    o.require(rho == 1.0, "Spearman " + fmt(rho));
    o.require(s["strictly_decreasing"].get<bool>(), "E|D_T| not strictly decreasing");
    const double last = s["rows"].back()["mean_abs_gap_T"].get<double>();
    o.require(last < 1e-2, "E|D_T| at 1e-4 = " + fmt(last));

    json d = config::scenario_document("cir-stable");
    d["experiment"]["psi_n"] = {1, 2, 5};
    const json c = report::run_couple(config::parse(d), {1, true, nullptr});
    double worst = 0.0;
    for (const auto& g : c["gronwall"]) {
        const double v = g["max_violation_in_se"].get<double>();
        worst = std::max(worst, v);
        o.require(v <= 3.0, "Gronwall n=" + std::to_string(g["n"].get<int>()) + " violation " + fmt(v) + " SE");
    }
    o.require(c["gronwall"].size() == 3, "missing Gronwall diagnostics");
    if (o.ok) {
        o.detail = "Spearman 1, E|D_T|(1e-4) = " + fmt(last) + ", worst Gronwall violation " + fmt(worst) + " SE";
    }
    return o;
}

// 8. State-independent small jumps: the gap never jumps.
Outcome additive_jumps() {
    Outcome o;
    const auto cfg = config::parse(config::scenario_document("additive-jumps"));
    o.require(cfg.experiment.paths == 100, "scenario does not use 100 paths");
    const json c = report::run_couple(cfg, {1, false, nullptr});
    const json& e = c["event_gap_jumps"];
    const auto events = e["events"].get<std::size_t>();
    o.require(events > 0, "no jump events");
    o.require(e["nonzero"].get<std::size_t>() == 0, std::to_string(e["nonzero"].get<std::size_t>()) + " nonzero gap jumps");
    o.require(e["max_abs_increment_difference"].get<double>() == 0.0, "nonzero increment difference");
    if (o.ok) o.detail = std::to_string(events) + " events, every gap jump exactly 0";
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9. CLI scenario output: byte-identical reruns, numerically identical across threads.
Outcome determinism(const std::string& cli, const std::filesystem::path& work) {
    Outcome o;
    if (cli.empty()) {
        o.require(false, "no CLI path given");
        return o;
    }
    std::filesystem::create_directories(work);
    auto run = [&](unsigned threads, const std::string& name) {
        const auto out = work / name;
        const std::string cmd = "\"" + cli + "\" scenario cir-stable --seed 1 --threads " + std::to_string(threads) +
                                " --out \"" + out.string() + "\"";
        o.require(std::system(cmd.c_str()) == 0, "command failed: " + cmd);
        return slurp(out);
    };
    const std::string a = run(1, "t1_a.json");
    const std::string b = run(1, "t1_b.json");
    const std::string c = run(4, "t4.json");
    o.require(!a.empty() && a == b, "two single-thread runs differ");
    json ja = json::parse(a, nullptr, false), jc = json::parse(c, nullptr, false);
    o.require(!ja.is_discarded() && !jc.is_discarded(), "unparseable report");
    if (o.ok) {
        ja.erase("metadata");
        jc.erase("metadata");
        o.require(ja == jc, "1-thread and 4-thread reports differ numerically");
    }
    if (o.ok) o.detail = "reruns byte-identical (" + std::to_string(a.size()) + " bytes); 1 vs 4 threads identical";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::filesystem::path work = argc > 2 ? argv[2] : std::filesystem::temp_directory_path() / "jsde_acceptance";

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "levy band integrals", 1.0, levy_oracles},
        {2, "level sequences", 1.0, levels_oracle},
        {3, "psi invariants", 10.0, psi_suite},
        {4, "condition gate ground truth", 10.0, gate_ground_truth},
        {5, "solver exactness", 5.0, solver_exactness},
        {6, "linear coupling oracle", 5.0, linear_coupling},
        {7, "cir-stable gap shrinkage", 300.0, uniqueness_shadow},
        {8, "additive jumps leave the gap continuous", 30.0, additive_jumps},
        {9, "scenario determinism", 600.0, [&] { return determinism(cli, work); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r.ok = false;
            r.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.ok && secs > c.budget_s) {
            r.ok = false;
            r.detail = "over time budget: " + r.detail;
        }
        if (!r.ok) ++failed;
        std::printf("[%s] %d. %s (%.2fs / %.0fs): %s\n", r.ok ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                    r.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed ? 1 : 0;
}
