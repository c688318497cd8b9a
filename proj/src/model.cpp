#include "jsde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jsde/error.hpp"
#include "jsde/parallel.hpp"

namespace jsde {

// ---------------------------------------------------------------------------
// Modulus

Modulus Modulus::power(double gamma, double scale) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("modulus gamma must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("modulus scale must be positive");
    Modulus h;
    h.family_ = Family::Power;
    h.gamma_ = gamma;
    h.scale_ = scale;
    return h;
}

Modulus Modulus::linear(double scale) {
    Modulus h = power(1.0, scale);
    h.family_ = Family::Linear;
    return h;
}

Modulus Modulus::custom(std::function<double(double)> fn, std::string label) {
    if (!fn) throw InvalidArgument("custom modulus needs a function");
    Modulus h;
    h.family_ = Family::Custom;
    h.fn_ = std::move(fn);
    h.label_ = std::move(label);
    h.gamma_ = std::numeric_limits<double>::quiet_NaN();
    return h;
}

double Modulus::operator()(double u) const {
    if (family_ == Family::Custom) return fn_(u);
    if (u <= 0.0) return 0.0;
    return family_ == Family::Linear ? scale_ * u : scale_ * std::pow(u, gamma_);
}

std::string Modulus::describe() const {
    switch (family_) {
        case Family::Power: return "power:" + std::to_string(gamma_) + ":" + std::to_string(scale_);
        case Family::Linear: return "linear:" + std::to_string(scale_);
        case Family::Custom: return label_;
    }
    return "unknown";
}

double Modulus::inverse_square_log_density(double s) const {
    if (family_ == Family::Custom) {
        const double v = std::exp(s);
        const double h = fn_(v);
        return v / (h * h);
    }
    return std::exp((1.0 - 2.0 * gamma_) * s) / (scale_ * scale_);
}

double Modulus::inverse_square_integral_log(double s_lo, double s_hi) const {
    if (!(s_lo <= s_hi)) throw InvalidArgument("inverse_square_integral_log: reversed limits");
    if (s_lo == s_hi) return 0.0;
    if (family_ == Family::Custom) {
        quad::Options opt;
        opt.rel_tol = 1e-13;
        opt.overflow_guard = std::numeric_limits<double>::max();
        return quad::finite([this](double s) { return inverse_square_log_density(s); }, s_lo, s_hi, opt);
    }
    const double k2 = scale_ * scale_;
    const double beta = 1.0 - 2.0 * gamma_;
    if (beta == 0.0) return (s_hi - s_lo) / k2;
    // (e^{beta s_hi} - e^{beta s_lo}) / beta, written to keep precision when
    // the interval is short.
    return std::exp(beta * s_hi) * -std::expm1(beta * (s_lo - s_hi)) / beta / k2;
}

bool modulus_is_admissible(const Modulus& h, double u_max, int points) {
    if (h(0.0) != 0.0) return false;
    double prev = 0.0;
    for (int i = 1; i <= points; ++i) {
        const double u = u_max * std::pow(10.0, -12.0 * (points - i) / (points - 1));
        const double v = h(u);
        if (!std::isfinite(v) || !(v > 0.0) || v < prev) return false;
        prev = v;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Model

Coefficient JumpSDEModel::compensator(const Band& band, const quad::Options& opt) const {
    band.validate();
    if (small_jump_factor) {
        const double first = band_integral(levy, [](double y) { return y; }, band, opt);
        return [factor = small_jump_factor, first](double t, double x) { return factor(t, x) * first; };
    }
    return [f2 = small_jump, levy = levy, band, opt](double t, double x) {
        return band_integral(levy, [&](double y) { return f2(t, x, y); }, band, opt);
    };
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<double> SampleSpec::t_grid() const {
    std::vector<double> g(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) {
        g[i] = nt == 1 ? t_lo : t_lo + (t_hi - t_lo) * i / (nt - 1);
    }
    return g;
}

std::vector<double> SampleSpec::x_grid() const {
    std::vector<double> g(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) {
        g[i] = nx == 1 ? x_lo : x_lo + (x_hi - x_lo) * i / (nx - 1);
    }
    return g;
}

void SampleSpec::validate() const {
    if (nt < 1 || nx < 2) throw InvalidArgument("sample spec needs nt >= 1 and nx >= 2");
    if (!(t_lo <= t_hi) || !(x_lo < x_hi)) throw InvalidArgument("sample spec ranges are empty");
    if (!(rel_tol >= 0.0)) throw InvalidArgument("sample spec rel_tol must be non-negative");
    if (!(divergence_eps > 0.0)) throw InvalidArgument("divergence eps must be positive");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

const ConditionEntry* ConditionReport::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

std::vector<std::string> ConditionReport::failing() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
        if (!e.informational && e.verdict != Verdict::Pass) out.push_back(e.name);
    }
    return out;
}

namespace {

constexpr double kInfRatio = std::numeric_limits<double>::infinity();

struct Worst {
    double ratio = -kInfRatio;
    Witness w;
    std::string note;

    void offer(double r, const Witness& cand, std::string why = {}) {
        if (std::isnan(r)) r = kInfRatio;
        if (r > ratio) {
            ratio = r;
            w = cand;
            note = std::move(why);
        }
    }
};

// Scans all (t, x < x') triples. `term(t, x, x', lhs, denom)` fills the
// sampled left side and the normalizer; the ratio lhs / denom is compared with
// `bound`.
template <class Term>
ConditionEntry scan_pairs(const char* name, const SampleSpec& spec, double bound, Term&& term) {
    spec.validate();
    const auto ts = spec.t_grid();
    const auto xs = spec.x_grid();
    std::vector<Worst> per_t(ts.size());

    parallel_for(ts.size(), spec.threads, [&](std::size_t it) {
        const double t = ts[it];
        Worst& worst = per_t[it];
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                double lhs = 0.0, denom = 1.0, rhs_unit = 1.0;
                std::string why;
                try {
                    term(t, xs[i], xs[j], lhs, denom);
                } catch (const DivergenceError& e) {
                    lhs = kInfRatio;
                    why = std::string("integral diverges: ") + e.what();
                }
                if (!std::isfinite(lhs) && why.empty()) why = "non-finite evaluation";
                rhs_unit = denom;
                double r = 0.0;
                if (lhs == 0.0) {
                    r = 0.0;
                } else if (denom > 0.0) {
                    r = lhs / denom;
                } else {
                    r = kInfRatio;
                }
                worst.offer(r, Witness{t, xs[i], xs[j], lhs, bound * rhs_unit}, std::move(why));
            }
        }
    });

    Worst total;
    for (auto& w : per_t) {
        if (w.ratio > total.ratio) total = std::move(w);
    }

    ConditionEntry e;
    e.name = name;
    e.worst = total.ratio;
    e.margin = bound - total.ratio;
    e.witness = total.w;
    e.note = total.note;
    const double slack = spec.rel_tol * std::max(bound, 0.0);
    const bool violated = total.ratio > bound + slack;
    e.verdict = violated ? Verdict::Fail : Verdict::Pass;
    e.equality = !violated && std::abs(total.ratio - bound) <= slack;
    if (!violated && e.note.empty()) e.note = "no violation found on the sampled grid";
    return e;
}

}  // namespace

ConditionEntry check_drift_lipschitz(const JumpSDEModel& m, const SampleSpec& spec) {
    return scan_pairs(kDriftLipschitz, spec, m.lipschitz_K,
                      [&](double t, double x, double xp, double& lhs, double& denom) {
                          lhs = std::abs(m.drift(t, x) - m.drift(t, xp));
                          denom = std::abs(x - xp);
                      });
}

ConditionEntry check_sigma_modulus(const JumpSDEModel& m, const SampleSpec& spec) {
    return scan_pairs(kSigmaModulus, spec, 1.0,
                      [&](double t, double x, double xp, double& lhs, double& denom) {
                          lhs = std::abs(m.diffusion(t, x) - m.diffusion(t, xp));
                          denom = m.modulus(std::abs(x - xp));
                      });
}

namespace {

// |y|^p moment of nu over the band, +inf when it diverges.
double moment_or_inf(const JumpSDEModel& m, double p, const Band& band, const quad::Options& opt) {
    try {
        return band_moment(m.levy, p, band, opt);
    } catch (const DivergenceError&) {
        return kInfRatio;
    }
}

// |F(x) - F(x')|^p * moment, exact for f2 = F(t,x) y; zero when the factors agree.
double factored(double df, double p, double moment) {
    if (df == 0.0) return 0.0;
    return std::pow(std::abs(df), p) * moment;
}

}  // namespace

ConditionEntry check_jump_lipschitz(const JumpSDEModel& m, const SampleSpec& spec) {
    const Band band{0.0, m.cutoff_c};
    if (m.small_jump_factor) {
        const double m1 = moment_or_inf(m, 1.0, band, spec.quad);
        return scan_pairs(kJumpLipschitz, spec, m.lipschitz_K,
                          [&](double t, double x, double xp, double& lhs, double& denom) {
                              lhs = factored(m.small_jump_factor(t, x) - m.small_jump_factor(t, xp), 1.0, m1);
                              denom = std::abs(x - xp);
                          });
    }
    return scan_pairs(kJumpLipschitz, spec, m.lipschitz_K,
                      [&](double t, double x, double xp, double& lhs, double& denom) {
                          lhs = band_integral(
                              m.levy,
                              [&](double y) {
                                  return std::abs(m.small_jump(t, x, y) - m.small_jump(t, xp, y));
                              },
                              band, spec.quad);
                          denom = std::abs(x - xp);
                      });
}

ConditionEntry check_weak_l2_condition(const JumpSDEModel& m, const SampleSpec& spec) {
    const Band band{0.0, m.cutoff_c};
    const double m2 = m.small_jump_factor ? moment_or_inf(m, 2.0, band, spec.quad) : 0.0;
    auto e = scan_pairs(kWeakL2, spec, 1.0, [&](double t, double x, double xp, double& lhs, double& denom) {
        if (m.small_jump_factor) {
            lhs = factored(m.small_jump_factor(t, x) - m.small_jump_factor(t, xp), 2.0, m2);
        } else {
            lhs = band_integral(
                m.levy,
                [&](double y) {
                    const double d = m.small_jump(t, x, y) - m.small_jump(t, xp, y);
                    return d * d;
                },
                band, spec.quad);
        }
        const double h = m.modulus(std::abs(x - xp));
        denom = h * h;
    });
    e.informational = true;
    e.note += "; informational only, not sufficient for uniqueness";
    return e;
}

ConditionEntry check_summability(const JumpSDEModel& m, const SampleSpec& spec) {
    spec.validate();
    const Band band{0.0, m.cutoff_c};
    const auto ts = spec.t_grid();
    const auto xs = spec.x_grid();
    struct Slot {
        double sup = -1.0;
        Witness w;
        std::string note;
    };
    std::vector<Slot> per_t(ts.size());

    parallel_for(ts.size(), spec.threads, [&](std::size_t it) {
        const double t = ts[it];
        Slot& slot = per_t[it];
        for (double x : xs) {
            double v = 0.0;
            std::string why;
            try {
                v = band_integral(
                    m.levy,
                    [&](double y) {
                        const double f = m.small_jump(t, x, y);
                        return std::max(f * f, std::abs(f));
                    },
                    band, spec.quad);
            } catch (const DivergenceError& e) {
                v = kInfRatio;
                why = std::string("integral diverges: ") + e.what();
            }
            if (std::isnan(v)) v = kInfRatio;
            if (v > slot.sup) {
                slot.sup = v;
                slot.w = Witness{t, x, x, v, spec.quad.overflow_guard};
                slot.note = why;
                if (std::isinf(v)) return;
            }
        }
    });

    Slot total;
    for (auto& s : per_t) {
        if (s.sup > total.sup) total = std::move(s);
    }
    ConditionEntry e;
    e.name = kSummability;
    e.worst = total.sup;
    e.margin = spec.quad.overflow_guard - total.sup;
    e.witness = total.w;
    const bool finite = std::isfinite(total.sup) && total.sup <= spec.quad.overflow_guard;
    e.verdict = finite ? Verdict::Pass : Verdict::Fail;
    e.note = finite ? "integral finite at every sampled (t, x); worst is the supremum" : total.note;
    return e;
}

ConditionEntry check_modulus_divergence(const Modulus& h, double eps, double cap, double plateau) {
    if (!(eps > 0.0)) throw InvalidArgument("check_modulus_divergence: eps must be positive");
    ConditionEntry e;
    e.name = kModulusDivergence;

    if (h.family() != Modulus::Family::Custom) {
        const double gamma = h.gamma();
        if (gamma >= 0.5) {
            e.verdict = Verdict::Pass;
            e.worst = kInfRatio;
            e.margin = gamma - 0.5;
            e.equality = gamma == 0.5;
            e.note = "power modulus with gamma >= 1/2: integral of h^-2 near 0 diverges";
        } else {
            const double k2 = h.scale() * h.scale();
            const double value = std::pow(eps, 1.0 - 2.0 * gamma) / ((1.0 - 2.0 * gamma) * k2);
            e.verdict = Verdict::Fail;
            e.worst = value;
            e.margin = gamma - 0.5;
            e.witness = Witness{0.0, 0.0, eps, value, kInfRatio};
            e.note = "power modulus with gamma < 1/2: integral of h^-2 over (0, eps) is finite";
        }
        return e;
    }

    double total = 0.0;
    int flat = 0;
    double upper = std::log(eps);
    for (int k = 1; k <= 40; ++k) {
        const double lower = std::log(eps) - k * std::log(2.0);
        double piece = 0.0;
        try {
            piece = h.inverse_square_integral_log(lower, upper);
        } catch (const std::exception& ex) {
            e.verdict = Verdict::Inconclusive;
            e.note = std::string("modulus not evaluable: ") + ex.what();
            return e;
        }
        if (!std::isfinite(piece)) piece = kInfRatio;
        total += piece;
        upper = lower;
        e.worst = total;
        e.witness = Witness{0.0, 0.0, std::exp(lower), total, cap};
        if (total > cap) {
            e.verdict = Verdict::Pass;
            e.margin = total - cap;
            e.note = "integral of h^-2 exceeds the divergence cap at delta = eps * 2^-" + std::to_string(k);
            return e;
        }
        flat = (piece <= plateau * total) ? flat + 1 : 0;
        if (flat >= 5) {
            e.verdict = Verdict::Fail;
            e.margin = total - cap;
            e.note = "integral of h^-2 converges (plateau over 5 halvings)";
            return e;
        }
    }
    e.verdict = Verdict::Inconclusive;
    e.margin = total - cap;
    e.note = "integral of h^-2 neither exceeded the cap nor settled within 40 halvings";
    return e;
}

ConditionReport theorem1_gate(const JumpSDEModel& m, const SampleSpec& spec) {
    ConditionReport report;
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            report.entries.push_back(fn());
        } catch (const std::exception& ex) {
            ConditionEntry e;
            e.name = name;
            e.verdict = Verdict::Inconclusive;
            e.note = std::string("check could not run: ") + ex.what();
            report.entries.push_back(std::move(e));
        }
    };
    guarded(kDriftLipschitz, [&] { return check_drift_lipschitz(m, spec); });
    guarded(kSigmaModulus, [&] { return check_sigma_modulus(m, spec); });
    guarded(kModulusDivergence, [&] {
        return check_modulus_divergence(m.modulus, spec.divergence_eps, spec.divergence_cap,
                                        spec.divergence_plateau);
    });
    guarded(kJumpLipschitz, [&] { return check_jump_lipschitz(m, spec); });
    guarded(kSummability, [&] { return check_summability(m, spec); });
    guarded(kWeakL2, [&] { return check_weak_l2_condition(m, spec); });
    report.entries.back().informational = true;

    report.gate = std::all_of(report.entries.begin(), report.entries.end(), [](const ConditionEntry& e) {
        return e.informational || e.verdict == Verdict::Pass;
    });
    return report;
}

}  // namespace jsde
