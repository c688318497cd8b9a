#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jsde/model.hpp"
#include "jsde/noise.hpp"
#include "jsde/solver.hpp"
#include "jsde/yw.hpp"

namespace jsde {

struct CouplingOptions {
    double x0_a = 0.0;
    double x0_b = 0.0;
    double horizon = 1.0;
    double step = 1e-3;
    double eps = 1e-3;
    std::size_t n_paths = 1000;
    std::uint64_t seed0 = 1;
    std::vector<int> psi_n;  // levels n for E[psi_n(D_t)]
    std::shared_ptr<const ApproximationSequence> sequence;  // built from the model modulus when null
    unsigned threads = 1;
    double overflow_guard = 1e12;
    const NoiseCache* cache = nullptr;
    std::string scenario;
    std::optional<bool> gate_verdict;
};

struct PsiGapSeries {
    int n = 0;
    std::vector<double> mean;
    std::vector<double> std_err;
};

struct CouplingReport {
    std::vector<double> times;
    std::vector<double> mean_abs_gap;
    std::vector<double> std_err;
    std::vector<PsiGapSeries> psi_gap;
    std::vector<double> quantile_levels;
    std::vector<double> terminal_gap_quantiles;  // of |D_T|
    std::size_t n_paths = 0;     // requested
    std::size_t n_used = 0;      // replications without blow-up
    std::size_t n_excluded = 0;  // replications with a blow-up in either solve
    std::uint64_t seed0 = 0;
    double x0_a = 0.0;
    double x0_b = 0.0;
    double horizon = 0.0;
    double step = 0.0;
    double eps = 0.0;
    std::string scenario;
    std::optional<bool> gate_verdict;

    // At most 1% of replications excluded.
    bool valid() const noexcept { return n_excluded * 100 <= n_paths; }
};

struct CoupledPair {
    std::uint64_t seed = 0;
    SolutionPath a;
    SolutionPath b;
};

// Report plus the retained per-replication path pairs (blow-ups dropped).
struct CouplingData {
    CouplingReport report;
    std::vector<CoupledPair> pairs;
};

/// Same-noise coupling: replication k draws NoisePath(seed0 + k), solves from
/// x0_a and x0_b on it and records D = X_a - X_b on the base grid.
CouplingReport couple(const JumpSDEModel& m, const CouplingOptions& opt);
CouplingData couple_paths(const JumpSDEModel& m, const CouplingOptions& opt);

struct ShrinkRow {
    double delta = 0.0;
    double mean_abs_gap_T = 0.0;
    double std_err_T = 0.0;
    double ratio = 0.0;       // to the previous row; NaN for the first row or a zero predecessor
    double normalized = 0.0;  // E|D_T| / delta; NaN for delta = 0
    std::size_t n_excluded = 0;
};

struct ShrinkReport {
    std::vector<ShrinkRow> rows;
    double spearman = 0.0;  // rank correlation of delta and E|D_T|
    bool strictly_decreasing = false;
    // max over delta > 0 of log(E|D_T| / delta) / T
    double gronwall_rate = 0.0;
    bool valid = true;
};

/// couple() from (base_x0 + delta, base_x0) for each delta. Gaps must be
/// nonnegative and strictly decreasing.
ShrinkReport shrink_study(const JumpSDEModel& m, double base_x0, const std::vector<double>& gaps,
                          CouplingOptions opt);

struct GronwallDiagnostic {
    int n = 0;
    double c1 = 0.0;  // 2K
    double c2 = 1.0;
    std::vector<double> times;
    std::vector<double> lhs;  // E[psi_n(D_t)]
    std::vector<double> rhs;  // psi_n(D_0) + c1 int_0^t E|D_s| ds + c2 t/n
    // Mean and standard error of Z_t = psi_n(D_t) - psi_n(D_0) - c1 int_0^t |D_s| ds - c2 t/n.
    std::vector<double> excess;
    std::vector<double> excess_std_err;
    double max_violation = 0.0;      // max_t excess
    double max_violation_in_se = 0.0;  // max_t excess / std_err (0 where both vanish)
    bool within_noise = true;        // excess <= 3 std_err for every t

    // Empirical counterparts of the three bounds of the argument, with the
    // bound each one is compared against.
    std::vector<double> drift_term;      // E int psi'(D) (b(X_a) - b(X_b)) ds
    std::vector<double> drift_bound;     // K int E|D|
    std::vector<double> diffusion_term;  // E int psi''(D) (sigma(X_a) - sigma(X_b))^2 / 2 ds
    std::vector<double> diffusion_bound; // t / n
    std::vector<double> jump_term;       // realized psi(D) jumps minus compensator drift
    std::vector<double> jump_bound;      // K int E|D|
};

GronwallDiagnostic gronwall_diagnostic(const JumpSDEModel& m, const CouplingData& data,
                                       const ApproximationSequence& seq, int n);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Type-7 sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double q);

}  // namespace jsde
