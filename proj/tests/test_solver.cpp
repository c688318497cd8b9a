#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jsde/error.hpp"
#include "jsde/solver.hpp"

using namespace jsde;

namespace {

NoisePath quiet_noise(double horizon, double step, double c = 1.0, double eps = 0.1) {
    NoisePath p;
    p.horizon = horizon;
    p.base_step = step;
    p.grid_end = horizon;
    p.cutoff_c = c;
    p.truncation_eps = eps;
    p.brownian_increments.assign(cell_count_for(horizon, step), 0.0);
    return p;
}

JumpSDEModel cir_stable() {
    JumpSDEModel m;
    m.levy = LevyMeasure::stable(0.5);
    m.cutoff_c = 1.0;
    m.drift = [](double, double x) { return 1.0 - x; };
    m.diffusion = [](double, double x) { return 0.5 * std::sqrt(std::max(x, 0.0)); };
    m.small_jump = [](double, double x, double y) { return std::clamp(0.2 * x, -1.0, 1.0) * y; };
    m.small_jump_factor = [](double, double x) { return std::clamp(0.2 * x, -1.0, 1.0); };
    m.big_jump = [](double, double, double y) { return y; };
    m.lipschitz_K = 1.0;
    return m;
}

}  // namespace

TEST_CASE("pure big-jump process") {
    JumpSDEModel m;
    m.big_jump = [](double, double, double y) { return y; };
    NoisePath noise = quiet_noise(1.0, 0.1);
    noise.big_jumps.push_back({0.5, 2.0});
    const SolutionPath p = solve(m, noise, 0.0);
    REQUIRE(p.jumps.size() == 1);
    CHECK(p.jumps[0].left_limit == 0.0);
    CHECK(p.jumps[0].big);
    for (std::size_t i = 0; i < p.times.size(); ++i) CHECK(p.values[i] == (p.times[i] < 0.5 ? 0.0 : 2.0));
    CHECK(p.grid_values().size() == 11);
}

TEST_CASE("pure Brownian reduction reproduces the driving path") {
    JumpSDEModel m;
    m.diffusion = [](double, double) { return 1.0; };
    for (double x0 : {0.0, 0.7}) {
        const NoisePath noise = generate(LevyMeasure::zero(), 1.0, 1e-3, 1.0, 0.1, 3);
        const SolutionPath p = solve(m, noise, x0);
        const auto v = p.grid_values();
        REQUIRE(v.size() == noise.cell_count() + 1);
        double acc = x0;
        CHECK(v[0] == acc);
        for (std::size_t k = 0; k < noise.cell_count(); ++k) {
            acc += noise.brownian_increments[k];
            CHECK(v[k + 1] == acc);
        }
    }
}

TEST_CASE("jump maps are applied to the left limit") {
    const JumpSDEModel m = cir_stable();
    const NoisePath noise = generate(m.levy, 2.0, 1e-2, 1.0, 0.01, 12);
    const SolutionPath p = solve(m, noise, 1.0);
    REQUIRE_FALSE(p.blew_up());
    CHECK(p.jumps.size() == noise.big_jumps.size() + noise.small_jumps.size());
    for (const auto& j : p.jumps) {
        const double f = j.big ? m.big_jump(j.time, j.left_limit, j.mark) : m.small_jump(j.time, j.left_limit, j.mark);
        CHECK(j.increment == f);
        CHECK(p.values[j.index] == j.left_limit + f);
        CHECK(p.times[j.index] == j.time);
    }
    CHECK(std::is_sorted(p.times.begin(), p.times.end()));
    for (double v : p.values) CHECK(std::isfinite(v));
}

TEST_CASE("restriction before the first big jump equals the small-jump-only solve") {
    const JumpSDEModel m = cir_stable();
    JumpSDEModel small_only = m;
    small_only.big_jump = [](double, double, double) { return 0.0; };
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const NoisePath noise = generate(m.levy, 1.0, 1e-3, 1.0, 1e-3, seed);
        if (noise.big_jumps.empty()) continue;
        const double t1 = noise.big_jumps.front().time;
        const SolutionPath full = solve(m, noise, 1.0);
        const SolutionPath part = solve(small_only, split_before(noise, t1), 1.0);
        REQUIRE(part.times.size() >= 1);
        // Every point of the restricted solve before t1 is a point of the full solve.
        std::size_t i = 0;
        for (; i + 1 < part.times.size(); ++i) {
            CHECK(part.times[i] == full.times[i]);
            CHECK(part.values[i] == full.values[i]);
        }
        // Its endpoint at t1 is the left limit of the full solution there.
        const auto it = std::find_if(full.jumps.begin(), full.jumps.end(), [](const JumpRecord& j) { return j.big; });
        REQUIRE(it != full.jumps.end());
        CHECK(part.times.back() == t1);
        CHECK(part.values.back() == it->left_limit);
        ++checked;
    }
    CHECK(checked > 30);
}

TEST_CASE("determinism") {
    const JumpSDEModel m = cir_stable();
    const NoisePath noise = generate(m.levy, 1.0, 1e-3, 1.0, 1e-3, 99);
    CHECK(solve(m, noise, 0.5) == solve(m, noise, 0.5));
}

TEST_CASE("symmetric small jumps have zero mean") {
    JumpSDEModel m;
    m.levy = LevyMeasure::stable(0.5);
    m.small_jump = [](double, double, double y) { return y; };
    m.small_jump_factor = [](double, double) { return 1.0; };
    const Solver solver(m, 0.01);
    const int seeds = 10000;
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < seeds; ++k) {
        const double x = solver.solve(generate(m.levy, 1.0, 0.1, 1.0, 0.01, k), 0.0).values.back();
        s += x;
        s2 += x * x;
    }
    const double mean = s / seeds;
    const double se = std::sqrt((s2 / seeds - mean * mean) / (seeds - 1));
    CHECK(std::abs(mean) <= 3.0 * se);
    CHECK(m.compensator(Band{0.01, 1.0})(0.0, 0.0) == 0.0);
}

TEST_CASE("compensated small-jump contribution is centred") {
    SUBCASE("stable band") {
        JumpSDEModel m;
        m.levy = LevyMeasure::stable(0.5);
        m.small_jump = [](double, double, double y) { return y; };
        m.small_jump_factor = [](double, double) { return 1.0; };
        const Solver solver(m, 0.1);
        const int seeds = 100000;
        double s = 0.0, s2 = 0.0;
        for (int k = 0; k < seeds; ++k) {
            const double x = solver.solve(generate(m.levy, 1.0, 1.0, 1.0, 0.1, k), 0.0).values.back();
            s += x;
            s2 += x * x;
        }
        const double mean = s / seeds;
        const double se = std::sqrt((s2 / seeds - mean * mean) / (seeds - 1));
        CHECK(std::abs(mean) <= 3.0 * se);
    }
    SUBCASE("one-sided atom has a nonzero compensator") {
        JumpSDEModel m;
        m.levy = LevyMeasure::finite_atoms({{0.5, 2.0}});
        m.small_jump = [](double, double, double y) { return y; };
        CHECK(m.compensator(Band{0.1, 1.0})(0.0, 0.0) == doctest::Approx(1.0));
        const Solver solver(m, 0.1);
        const int seeds = 100000;
        double s = 0.0, s2 = 0.0;
        for (int k = 0; k < seeds; ++k) {
            const double x = solver.solve(generate(m.levy, 1.0, 0.25, 1.0, 0.1, k), 0.0).values.back();
            s += x;
            s2 += x * x;
        }
        const double mean = s / seeds;
        const double se = std::sqrt((s2 / seeds - mean * mean) / (seeds - 1));
        CHECK(std::abs(mean) <= 3.0 * se);
    }
}

TEST_CASE("strong self-convergence of the Euler scheme") {
    JumpSDEModel m;
    m.drift = [](double, double x) { return -x; };
    m.diffusion = [](double, double) { return 1.0; };
    const int seeds = 400;
    const std::size_t fine_cells = 1u << 11;
    std::vector<double> logs_dt, logs_gap;
    for (int level = 4; level <= 10; ++level) {
        const std::size_t factor = fine_cells >> (level + 1);  // cells of width 2^-(level+1)
        double gap = 0.0;
        for (int k = 0; k < seeds; ++k) {
            const NoisePath fine = generate(LevyMeasure::zero(), 1.0, 1.0 / fine_cells, 1.0, 0.1, 500 + k);
            const NoisePath half = factor == 1 ? fine : coarsen(fine, factor);
            const NoisePath coarse = coarsen(fine, factor * 2);
            gap += std::abs(solve(m, coarse, 1.0).values.back() - solve(m, half, 1.0).values.back()) / seeds;
        }
        logs_dt.push_back(std::log(std::ldexp(1.0, -level)));
        logs_gap.push_back(std::log(gap));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < logs_dt.size(); ++i) {
        mx += logs_dt[i] / logs_dt.size();
        my += logs_gap[i] / logs_dt.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < logs_dt.size(); ++i) {
        sxy += (logs_dt[i] - mx) * (logs_gap[i] - my);
        sxx += (logs_dt[i] - mx) * (logs_dt[i] - mx);
    }
    CHECK(sxy / sxx >= 0.4);
}

TEST_CASE("blow-up truncates the path") {
    JumpSDEModel m;
    m.drift = [](double, double x) { return x * x; };
    const SolutionPath p = solve(m, quiet_noise(3.0, 1e-3), 1.0);
    REQUIRE(p.blew_up());
    CHECK(*p.blow_up_time > 0.9);
    CHECK(*p.blow_up_time < 3.0);
    for (double v : p.values) CHECK(std::abs(v) <= 1e12);
    CHECK(p.times.back() < *p.blow_up_time);
}

TEST_CASE("solver preconditions and metadata") {
    const JumpSDEModel m = cir_stable();
    const NoisePath other_c = generate(m.levy, 1.0, 0.01, 2.0, 0.01, 1);
    CHECK_THROWS_AS(solve(m, other_c, 0.0), InvalidArgument);
    CHECK_THROWS_AS(Solver(m, 1.0), InvalidArgument);
    const Solver solver(m, 0.01);
    CHECK_THROWS_AS(solver.solve(generate(m.levy, 1.0, 0.01, 1.0, 0.02, 1), 0.0), InvalidArgument);

    JumpSDEModel id;
    id.levy = LevyMeasure::stable(0.5);
    id.small_jump = [](double, double, double y) { return y; };
    const SolutionPath p = solve(id, generate(id.levy, 2.0, 0.1, 1.0, 0.01, 4), 0.0);
    // T * int_{|y|<=eps} y^2 nu(dy) = T * 2 eps^1.5 / 1.5
    CHECK(p.omitted_variance == doctest::Approx(2.0 * 2.0 * std::pow(0.01, 1.5) / 1.5).epsilon(1e-8));
}

TEST_CASE("path csv") {
    JumpSDEModel m;
    m.big_jump = [](double, double, double y) { return y; };
    NoisePath noise = quiet_noise(1.0, 0.5);
    noise.big_jumps.push_back({0.25, 2.0});
    std::ostringstream os;
    write_path_csv(os, solve(m, noise, 0.0));
    CHECK(os.str() == "time,x,is_jump,jump_kind\n0,0,0,none\n0.25,2,1,big\n0.5,2,0,none\n1,2,0,none\n");
}
