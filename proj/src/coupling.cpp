#include "jsde/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/statistics/bivariate_statistics.hpp>

#include "jsde/error.hpp"
#include "jsde/parallel.hpp"

namespace jsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Running mean and variance (Welford). A constant sequence has an exact mean.
struct Running {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double std_err() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

struct Replication {
    bool excluded = false;
    std::vector<double> abs_gap;
    std::vector<std::vector<double>> psi_gap;
    std::vector<double> times;
    std::optional<CoupledPair> pair;
};

void validate(const CouplingOptions& opt) {
    if (opt.n_paths < 1) throw InvalidArgument("couple: n_paths must be at least 1");
    if (!std::isfinite(opt.x0_a) || !std::isfinite(opt.x0_b)) {
        throw InvalidArgument("couple: initial values must be finite");
    }
    if (!(opt.horizon > 0.0) || !(opt.step > 0.0) || !(opt.eps > 0.0)) {
        throw InvalidArgument("couple: horizon, step and eps must be positive");
    }
    for (int n : opt.psi_n) {
        if (n < 1) throw InvalidArgument("couple: psi levels must be at least 1");
    }
}

CouplingData run(const JumpSDEModel& m, const CouplingOptions& opt, bool keep_paths) {
    validate(opt);
    std::shared_ptr<const ApproximationSequence> seq = opt.sequence;
    if (!opt.psi_n.empty()) {
        const int need = *std::max_element(opt.psi_n.begin(), opt.psi_n.end());
        if (!seq || seq->n_max() < need) {
            seq = std::make_shared<const ApproximationSequence>(ApproximationSequence::build(m.modulus, need));
        }
    }

    SolverOptions sopt;
    sopt.overflow_guard = opt.overflow_guard;
    sopt.report_omitted_variance = false;
    sopt.gate_verdict = opt.gate_verdict;
    const Solver solver(m, opt.eps, sopt);

    std::vector<Replication> reps(opt.n_paths);
    parallel_for(opt.n_paths, opt.threads, [&](std::size_t k) {
        const std::uint64_t seed = opt.seed0 + k;
        const NoisePath noise =
            opt.cache ? opt.cache->load_or_generate(m.levy, opt.horizon, opt.step, m.cutoff_c, opt.eps, seed)
                      : generate(m.levy, opt.horizon, opt.step, m.cutoff_c, opt.eps, seed);
        SolutionPath a = solver.solve(noise, opt.x0_a);
        SolutionPath b = solver.solve(noise, opt.x0_b);
        Replication& r = reps[k];
        if (a.blew_up() || b.blew_up()) {
            r.excluded = true;
            return;
        }
        const std::vector<double> va = a.grid_values();
        const std::vector<double> vb = b.grid_values();
        r.times = a.grid_times();
        r.abs_gap.resize(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) r.abs_gap[i] = std::abs(va[i] - vb[i]);
        for (int n : opt.psi_n) {
            std::vector<double> p(va.size());
            for (std::size_t i = 0; i < va.size(); ++i) p[i] = seq->psi(n, va[i] - vb[i]);
            r.psi_gap.push_back(std::move(p));
        }
        if (keep_paths) r.pair = CoupledPair{seed, std::move(a), std::move(b)};
    });

    CouplingData out;
    CouplingReport& rep = out.report;
    rep.n_paths = opt.n_paths;
    rep.seed0 = opt.seed0;
    rep.x0_a = opt.x0_a;
    rep.x0_b = opt.x0_b;
    rep.horizon = opt.horizon;
    rep.step = opt.step;
    rep.eps = opt.eps;
    rep.scenario = opt.scenario;
    rep.gate_verdict = opt.gate_verdict;
    rep.quantile_levels = {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0};

    const Replication* first = nullptr;
    for (const auto& r : reps) {
        if (r.excluded) {
            ++rep.n_excluded;
        } else if (!first) {
            first = &r;
        }
    }
    rep.n_used = rep.n_paths - rep.n_excluded;
    const std::size_t nt = first ? first->times.size() : cell_count_for(opt.horizon, opt.step) + 1;
    if (first) {
        rep.times = first->times;
    } else {
        rep.times.resize(nt, kNaN);
    }

    std::vector<Running> gap(nt);
    std::vector<std::vector<Running>> psi(opt.psi_n.size(), std::vector<Running>(nt));
    std::vector<double> terminal;
    terminal.reserve(rep.n_used);
    for (auto& r : reps) {
        if (r.excluded) continue;
        for (std::size_t i = 0; i < nt; ++i) gap[i].add(r.abs_gap[i]);
        for (std::size_t j = 0; j < opt.psi_n.size(); ++j) {
            for (std::size_t i = 0; i < nt; ++i) psi[j][i].add(r.psi_gap[j][i]);
        }
        terminal.push_back(r.abs_gap.back());
        if (keep_paths) out.pairs.push_back(std::move(*r.pair));
    }

    rep.mean_abs_gap.resize(nt);
    rep.std_err.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        rep.mean_abs_gap[i] = gap[i].n ? gap[i].mean : kNaN;
        rep.std_err[i] = gap[i].n ? gap[i].std_err() : kNaN;
    }
    for (std::size_t j = 0; j < opt.psi_n.size(); ++j) {
        PsiGapSeries s;
        s.n = opt.psi_n[j];
        for (std::size_t i = 0; i < nt; ++i) {
            s.mean.push_back(psi[j][i].n ? psi[j][i].mean : kNaN);
            s.std_err.push_back(psi[j][i].n ? psi[j][i].std_err() : kNaN);
        }
        rep.psi_gap.push_back(std::move(s));
    }
    std::sort(terminal.begin(), terminal.end());
    for (double q : rep.quantile_levels) rep.terminal_gap_quantiles.push_back(sorted_quantile(terminal, q));
    return out;
}

}  // namespace

double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return kNaN;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? sorted[lo] : sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman: need two equal-length samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    return boost::math::statistics::correlation_coefficient(ranks(x), ranks(y));
}

CouplingReport couple(const JumpSDEModel& m, const CouplingOptions& opt) {
    return run(m, opt, false).report;
}

CouplingData couple_paths(const JumpSDEModel& m, const CouplingOptions& opt) {
    return run(m, opt, true);
}

ShrinkReport shrink_study(const JumpSDEModel& m, double base_x0, const std::vector<double>& gaps,
                          CouplingOptions opt) {
    if (gaps.empty()) throw InvalidArgument("shrink_study: need at least one gap");
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (!(gaps[i] >= 0.0) || !std::isfinite(gaps[i])) {
            throw InvalidArgument("shrink_study: gaps must be finite and nonnegative");
        }
        if (i > 0 && !(gaps[i] < gaps[i - 1])) throw InvalidArgument("shrink_study: gaps must be strictly decreasing");
    }
    opt.psi_n.clear();
    ShrinkReport out;
    std::vector<double> deltas, means;
    for (double d : gaps) {
        opt.x0_a = base_x0 + d;
        opt.x0_b = base_x0;
        const CouplingReport r = couple(m, opt);
        ShrinkRow row;
        row.delta = d;
        row.mean_abs_gap_T = r.mean_abs_gap.back();
        row.std_err_T = r.std_err.back();
        row.n_excluded = r.n_excluded;
        row.normalized = d > 0.0 ? row.mean_abs_gap_T / d : kNaN;
        row.ratio = (!out.rows.empty() && out.rows.back().mean_abs_gap_T != 0.0)
                        ? row.mean_abs_gap_T / out.rows.back().mean_abs_gap_T
                        : kNaN;
        out.valid = out.valid && r.valid();
        out.rows.push_back(row);
        deltas.push_back(d);
        means.push_back(row.mean_abs_gap_T);
    }
    out.strictly_decreasing = true;
    for (std::size_t i = 1; i < means.size(); ++i) {
        if (!(means[i] < means[i - 1])) out.strictly_decreasing = false;
    }
    out.spearman = means.size() >= 2 ? spearman(deltas, means) : kNaN;
    out.gronwall_rate = -std::numeric_limits<double>::infinity();
    for (const auto& row : out.rows) {
        if (row.delta > 0.0 && row.mean_abs_gap_T > 0.0) {
            out.gronwall_rate = std::max(out.gronwall_rate, std::log(row.normalized) / opt.horizon);
        }
    }
    return out;
}

GronwallDiagnostic gronwall_diagnostic(const JumpSDEModel& m, const CouplingData& data,
                                       const ApproximationSequence& seq, int n) {
    if (n < 1 || n > seq.n_max()) throw InvalidArgument("gronwall_diagnostic: level out of range");
    const CouplingReport& rep = data.report;
    GronwallDiagnostic g;
    g.n = n;
    g.c1 = 2.0 * m.lipschitz_K;
    g.c2 = 1.0;
    g.times = rep.times;
    const std::size_t nt = g.times.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const Coefficient comp = m.compensator(Band{rep.eps, m.cutoff_c});
    const double psi0 = seq.psi(n, rep.x0_a - rep.x0_b);

    std::vector<Running> z(nt), lhs(nt), intabs(nt), drift(nt), diff(nt), jump(nt);
    for (const CoupledPair& p : data.pairs) {
        const SolutionPath& a = p.a;
        const SolutionPath& b = p.b;
        if (a.times.size() != b.times.size()) throw NumericalError("gronwall_diagnostic: coupled paths differ in grid");
        double s_abs = 0.0, s_drift = 0.0, s_diff = 0.0, s_jump = 0.0;
        std::size_t gi = 0, ji = 0;
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            const double t = a.times[i];
            const double d = a.values[i] - b.values[i];
            if (i > 0 && (a.kinds[i] & (kBigJumpPoint | kSmallJumpPoint))) {
                const JumpRecord& ja = a.jumps[ji];
                const JumpRecord& jb = b.jumps[ji];
                ++ji;
                s_jump += seq.psi(n, d) - seq.psi(n, ja.left_limit - jb.left_limit);
            }
            if (a.kinds[i] & kGridPoint) {
                const double pd = seq.psi(n, d);
                lhs[gi].add(pd);
                z[gi].add(pd - psi0 - g.c1 * s_abs - g.c2 * t * inv_n);
                intabs[gi].add(s_abs);
                drift[gi].add(s_drift);
                diff[gi].add(s_diff);
                jump[gi].add(s_jump);
                ++gi;
            }
            if (i + 1 < a.times.size()) {
                const double dt = a.times[i + 1] - t;
                const double xa = a.values[i], xb = b.values[i];
                const double dp = seq.psi_prime(n, d);
                const double ds = m.diffusion(t, xa) - m.diffusion(t, xb);
                s_abs += std::abs(d) * dt;
                s_drift += dp * (m.drift(t, xa) - m.drift(t, xb)) * dt;
                s_diff += 0.5 * seq.psi_second(n, d) * ds * ds * dt;
                s_jump -= dp * (comp(t, xa) - comp(t, xb)) * dt;
            }
        }
    }

    g.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nt; ++i) {
        const double t = g.times[i];
        const double ia = intabs[i].mean;
        g.lhs.push_back(lhs[i].mean);
        g.rhs.push_back(psi0 + g.c1 * ia + g.c2 * t * inv_n);
        g.excess.push_back(z[i].mean);
        g.excess_std_err.push_back(z[i].std_err());
        g.drift_term.push_back(drift[i].mean);
        g.drift_bound.push_back(m.lipschitz_K * ia);
        g.diffusion_term.push_back(diff[i].mean);
        g.diffusion_bound.push_back(t * inv_n);
        g.jump_term.push_back(jump[i].mean);
        g.jump_bound.push_back(m.lipschitz_K * ia);

        const double ex = z[i].mean, se = z[i].std_err();
        g.max_violation = std::max(g.max_violation, ex);
        if (se > 0.0) {
            g.max_violation_in_se = std::max(g.max_violation_in_se, ex / se);
        } else if (ex > 0.0) {
            g.max_violation_in_se = std::numeric_limits<double>::infinity();
        }
        if (ex > 3.0 * se + 1e-14) g.within_noise = false;
    }
    if (nt == 0 || data.pairs.empty()) {
        g.max_violation = kNaN;
        g.within_noise = false;
    }
    return g;
}

}  // namespace jsde
