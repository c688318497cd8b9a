#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jsde/levy.hpp"

namespace jsde {

using Coefficient = std::function<double(double t, double x)>;
using JumpCoefficient = std::function<double(double t, double x, double y)>;

/// Modulus of continuity h for the diffusion coefficient:
/// |sigma(t,x) - sigma(t,x')| <= h(|x - x'|).
class Modulus {
public:
    enum class Family { Power, Linear, Custom };

    // h(u) = scale * u^gamma
    static Modulus power(double gamma, double scale = 1.0);
    // h(u) = scale * u
    static Modulus linear(double scale = 1.0);
    static Modulus custom(std::function<double(double)> h, std::string label = "custom");

    double operator()(double u) const;

    Family family() const noexcept { return family_; }
    double gamma() const noexcept { return gamma_; }
    double scale() const noexcept { return scale_; }
    std::string describe() const;

    // h^-2(e^s) e^s: the integrand of the h^-2 integral in log coordinates.
    double inverse_square_log_density(double s) const;

    // Integral of h^-2 over (e^s_lo, e^s_hi); closed form for power/linear,
    // Gauss-Kronrod in log coordinates otherwise.
    double inverse_square_integral_log(double s_lo, double s_hi) const;

private:
    Family family_ = Family::Power;
    double gamma_ = 0.5;
    double scale_ = 1.0;
    std::function<double(double)> fn_;
    std::string label_;
};

/// Coefficients of
///   dX = b dt + sigma dW + int_{|y|<=c} f2 d(mu - nu dt) + int_{|y|>c} f1 dmu
/// together with the modulus h and Lipschitz constant K used by the condition
/// checkers. Callables must be pure so models can be shared across threads.
struct JumpSDEModel {
    std::string name = "model";
    Coefficient drift = [](double, double) { return 0.0; };
    Coefficient diffusion = [](double, double) { return 0.0; };
    JumpCoefficient big_jump = [](double, double, double) { return 0.0; };
    JumpCoefficient small_jump = [](double, double, double) { return 0.0; };
    double cutoff_c = 1.0;
    LevyMeasure levy = LevyMeasure::zero();
    Modulus modulus = Modulus::power(0.5);
    double lipschitz_K = 0.0;
    bool f2_state_independent = false;

    // Optional factorization small_jump(t,x,y) = small_jump_factor(t,x) * y.
    // When present the compensator costs one band integral per band instead
    // of one per evaluation.
    Coefficient small_jump_factor;

    // (t, x) -> integral of small_jump(t, x, .) against nu over the band.
    Coefficient compensator(const Band& band, const quad::Options& opt = {}) const;
};

/// Grids over which conditions are sampled: t in [t_lo, t_hi] (nt points),
/// x and x' in [x_lo, x_hi] (nx points each, unordered pairs with x != x').
struct SampleSpec {
    double t_lo = 0.0;
    double t_hi = 1.0;
    int nt = 41;
    double x_lo = -1.0;
    double x_hi = 1.0;
    int nx = 81;
    // Relative slack on every inequality (covers quadrature error).
    double rel_tol = 1e-8;
    // Modulus divergence test on (0, divergence_eps).
    double divergence_eps = 1.0;
    double divergence_cap = 1e6;
    double divergence_plateau = 1e-9;
    quad::Options quad{};
    unsigned threads = 1;

    std::vector<double> t_grid() const;
    std::vector<double> x_grid() const;
    void validate() const;
};

enum class Verdict { Pass, Fail, Inconclusive };
std::string to_string(Verdict v);

struct Witness {
    double t = 0.0;
    double x = 0.0;
    double x_prime = 0.0;
    double lhs = 0.0;  // sampled left-hand side of the inequality
    double rhs = 0.0;  // bound it is compared with
};

struct ConditionEntry {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<Witness> witness;
    // Bound constant minus worst sampled ratio (for ratio-type conditions);
    // for summability, overflow guard minus supremum.
    double margin = 0.0;
    // Worst sampled ratio (or the supremum / integral value).
    double worst = 0.0;
    // The worst point meets the bound with equality up to rel_tol.
    bool equality = false;
    bool informational = false;
    std::string note;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    bool gate = false;

    const ConditionEntry* find(const std::string& name) const;
    std::vector<std::string> failing() const;
};

inline constexpr const char* kDriftLipschitz = "drift_lipschitz";
inline constexpr const char* kSigmaModulus = "sigma_modulus";
inline constexpr const char* kModulusDivergence = "modulus_divergence";
inline constexpr const char* kJumpLipschitz = "jump_lipschitz";
inline constexpr const char* kSummability = "summability";
inline constexpr const char* kWeakL2 = "weak_l2";

// |b(t,x) - b(t,x')| <= K |x - x'|
ConditionEntry check_drift_lipschitz(const JumpSDEModel& m, const SampleSpec& spec);
// |sigma(t,x) - sigma(t,x')| <= h(|x - x'|)
ConditionEntry check_sigma_modulus(const JumpSDEModel& m, const SampleSpec& spec);
// int_0^eps h^-2 = infinity
ConditionEntry check_modulus_divergence(const Modulus& h, double eps, double cap = 1e6,
                                        double plateau = 1e-9);
// int_{|y|<=c} |f2(t,x,y) - f2(t,x',y)| nu(dy) <= K |x - x'|
ConditionEntry check_jump_lipschitz(const JumpSDEModel& m, const SampleSpec& spec);
// int_{|y|<=c} max(f2^2, |f2|) nu(dy) < infinity
ConditionEntry check_summability(const JumpSDEModel& m, const SampleSpec& spec);
// int_{|y|<=c} (f2(t,x,y) - f2(t,x',y))^2 nu(dy) <= h^2(|x - x'|); informational only.
ConditionEntry check_weak_l2_condition(const JumpSDEModel& m, const SampleSpec& spec);

// All five hypotheses of the uniqueness theorem; the weak L2 entry is appended
// for information and never affects the gate.
ConditionReport theorem1_gate(const JumpSDEModel& m, const SampleSpec& spec);

// Spot check of the modulus hypotheses on a grid in (0, u_max]: continuous,
// nondecreasing, h(0) = 0, positive away from zero.
bool modulus_is_admissible(const Modulus& h, double u_max = 10.0, int points = 2001);

}  // namespace jsde
