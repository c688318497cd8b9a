#include "jsde/levy.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "jsde/error.hpp"

namespace jsde {

void Band::validate() const {
    if (!(lo >= 0.0) || !(lo < hi) || std::isnan(hi)) {
        throw InvalidArgument("invalid band: need 0 <= lo < hi <= inf, got (" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
    }
}

bool Band::contains(double y) const {
    const double r = std::abs(y);
    return r > lo && r <= hi;
}

std::string to_string(LevyFamily f) {
    switch (f) {
        case LevyFamily::Stable: return "stable";
        case LevyFamily::TemperedStable: return "tempered_stable";
        case LevyFamily::FiniteAtoms: return "finite_atoms";
        case LevyFamily::Custom: return "custom";
    }
    return "unknown";
}

namespace {

void check_alpha_scale(double alpha, double scale) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw InvalidArgument("stable index alpha must lie in (0, 2)");
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("stable scale must be positive and finite");
    }
}

// |y| from the normalized stable measure on the band, by inverting
// F(r) = (lo^-a - r^-a) / (lo^-a - hi^-a).
double stable_abs_draw(double alpha, const Band& b, Rng& rng) {
    const double lo_pow = std::pow(b.lo, -alpha);
    const double hi_pow = std::isinf(b.hi) ? 0.0 : std::pow(b.hi, -alpha);
    const double w = lo_pow - rng.uniform_open() * (lo_pow - hi_pow);
    double r = std::pow(w, -1.0 / alpha);
    if (r <= b.lo) r = std::nextafter(b.lo, kInf);
    if (r > b.hi) r = b.hi;
    return r;
}

}  // namespace

LevyMeasure LevyMeasure::stable(double alpha, double scale) {
    check_alpha_scale(alpha, scale);
    LevyMeasure m;
    m.family_ = LevyFamily::Stable;
    m.alpha_ = alpha;
    m.scale_ = scale;
    return m;
}

LevyMeasure LevyMeasure::tempered_stable(double alpha, double scale, double tempering) {
    check_alpha_scale(alpha, scale);
    if (!(tempering >= 0.0) || !std::isfinite(tempering)) {
        throw InvalidArgument("tempering must be non-negative and finite");
    }
    LevyMeasure m;
    m.family_ = LevyFamily::TemperedStable;
    m.alpha_ = alpha;
    m.scale_ = scale;
    m.tempering_ = tempering;
    return m;
}

LevyMeasure LevyMeasure::finite_atoms(std::vector<Atom> atoms) {
    for (const auto& a : atoms) {
        if (a.position == 0.0 || !std::isfinite(a.position)) {
            throw InvalidArgument("atom positions must be finite and nonzero");
        }
        if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) {
            throw InvalidArgument("atom masses must be non-negative and finite");
        }
    }
    LevyMeasure m;
    m.family_ = LevyFamily::FiniteAtoms;
    m.atoms_ = std::move(atoms);
    return m;
}

LevyMeasure LevyMeasure::custom(std::function<double(double)> density, double envelope_alpha,
                                double envelope_scale) {
    if (!density) throw InvalidArgument("custom measure needs a density");
    check_alpha_scale(envelope_alpha, envelope_scale);
    LevyMeasure m;
    m.family_ = LevyFamily::Custom;
    m.alpha_ = envelope_alpha;
    m.scale_ = envelope_scale;
    m.custom_density_ = std::move(density);
    return m;
}

double LevyMeasure::density(double y) const {
    if (y == 0.0) return 0.0;
    const double r = std::abs(y);
    switch (family_) {
        case LevyFamily::Stable: return scale_ * std::pow(r, -1.0 - alpha_);
        case LevyFamily::TemperedStable:
            return scale_ * std::pow(r, -1.0 - alpha_) * std::exp(-tempering_ * r);
        case LevyFamily::Custom: return custom_density_(y);
        case LevyFamily::FiniteAtoms: return 0.0;
    }
    return 0.0;
}

double LevyMeasure::weighted_density(double y) const {
    if (y == 0.0) return 0.0;
    const double r = std::abs(y);
    switch (family_) {
        case LevyFamily::Stable: return scale_ * std::pow(r, -alpha_);
        case LevyFamily::TemperedStable:
            return scale_ * std::pow(r, -alpha_) * std::exp(-tempering_ * r);
        case LevyFamily::Custom: return r * custom_density_(y);
        case LevyFamily::FiniteAtoms: return 0.0;
    }
    return 0.0;
}

std::optional<double> LevyMeasure::closed_form_abs_moment(double p, const Band& band) const {
    band.validate();
    if (family_ != LevyFamily::Stable) return std::nullopt;
    const double e = p - alpha_;
    if (e == 0.0) {
        if (band.lo == 0.0 || std::isinf(band.hi)) return kInf;
        return 2.0 * scale_ * (std::log(band.hi) - std::log(band.lo));
    }
    if (band.lo == 0.0 && e < 0.0) return kInf;
    if (std::isinf(band.hi) && e > 0.0) return kInf;
    const double hi_term = std::isinf(band.hi) ? 0.0 : std::pow(band.hi, e);
    const double lo_term = band.lo == 0.0 ? 0.0 : std::pow(band.lo, e);
    return 2.0 * scale_ * (hi_term - lo_term) / e;
}

double band_integral(const LevyMeasure& m, const std::function<double(double)>& g, const Band& band,
                     const quad::Options& opt) {
    band.validate();
    if (!m.has_density()) {
        double sum = 0.0;
        for (const auto& a : m.atoms()) {
            if (band.contains(a.position)) sum += g(a.position) * a.mass;
        }
        if (!std::isfinite(sum) || std::abs(sum) > opt.overflow_guard) {
            throw DivergenceError("atom sum exceeds overflow guard");
        }
        return sum;
    }

    // y = +-r, r = e^-u, dy = r du: the integrand in u is
    // g(r) r nu(r) + g(-r) r nu(-r).
    auto in_u = [&](double u) {
        const double r = std::exp(-u);
        if (r == 0.0 || std::isinf(r)) return 0.0;
        const double wp = m.weighted_density(r);
        const double wn = m.weighted_density(-r);
        double v = 0.0;
        if (wp != 0.0) v += g(r) * wp;
        if (wn != 0.0) v += g(-r) * wn;
        return v;
    };

    const bool open_lo = band.lo == 0.0;
    const bool open_hi = std::isinf(band.hi);
    if (!open_lo && !open_hi) {
        return quad::finite(in_u, -std::log(band.hi), -std::log(band.lo), opt);
    }
    if (open_lo && !open_hi) {
        return quad::semi_infinite(in_u, -std::log(band.hi), +1, opt);
    }
    if (!open_lo && open_hi) {
        return quad::semi_infinite(in_u, -std::log(band.lo), -1, opt);
    }
    const double small = quad::semi_infinite(in_u, 0.0, +1, opt);
    const double large = quad::semi_infinite(in_u, 0.0, -1, opt);
    const double total = small + large;
    if (std::abs(total) > opt.overflow_guard) throw DivergenceError("integral exceeds overflow guard");
    return total;
}

double band_moment(const LevyMeasure& m, double p, const Band& band, const quad::Options& opt) {
    band.validate();
    if (auto cf = m.closed_form_abs_moment(p, band)) {
        if (!std::isfinite(*cf) || *cf > opt.overflow_guard) {
            throw DivergenceError("moment of order " + std::to_string(p) + " diverges on the band");
        }
        return *cf;
    }
    if (p == 0.0) return band_integral(m, [](double) { return 1.0; }, band, opt);
    return band_integral(m, [p](double y) { return std::pow(std::abs(y), p); }, band, opt);
}

double tail_mass(const LevyMeasure& m, double c, const quad::Options& opt) {
    if (!(c > 0.0)) throw InvalidArgument("tail_mass: cutoff must be positive");
    return band_mass(m, Band{c, kInf}, opt);
}

double sample_band(const LevyMeasure& m, const Band& band, Rng& rng) {
    band.validate();
    switch (m.family()) {
        case LevyFamily::Stable: {
            if (band.lo == 0.0) throw InvalidArgument("sample_band: band has infinite mass");
            const double r = stable_abs_draw(m.alpha(), band, rng);
            return rng.sign() * r;
        }
        case LevyFamily::TemperedStable: {
            if (band.lo == 0.0) throw InvalidArgument("sample_band: band has infinite mass");
            for (int attempt = 0; attempt < 1000000; ++attempt) {
                const double r = stable_abs_draw(m.alpha(), band, rng);
                const double s = rng.sign();
                if (rng.uniform() < std::exp(-m.tempering() * r)) return s * r;
            }
            throw NumericalError("sample_band: rejection sampler exhausted");
        }
        case LevyFamily::Custom: {
            if (band.lo == 0.0) throw InvalidArgument("sample_band: band has infinite mass");
            for (int attempt = 0; attempt < 1000000; ++attempt) {
                const double y = rng.sign() * stable_abs_draw(m.alpha(), band, rng);
                const double envelope = m.scale() * std::pow(std::abs(y), -1.0 - m.alpha());
                const double ratio = m.density(y) / envelope;
                if (ratio > 1.0 + 1e-12) {
                    throw NumericalError("sample_band: custom density exceeds its envelope at y = " +
                                         std::to_string(y));
                }
                if (rng.uniform() < ratio) return y;
            }
            throw NumericalError("sample_band: rejection sampler exhausted");
        }
        case LevyFamily::FiniteAtoms: {
            double total = 0.0;
            for (const auto& a : m.atoms()) {
                if (band.contains(a.position)) total += a.mass;
            }
            if (!(total > 0.0)) throw InvalidArgument("sample_band: band has zero mass");
            const double target = rng.uniform() * total;
            double acc = 0.0;
            double last = 0.0;
            for (const auto& a : m.atoms()) {
                if (!band.contains(a.position) || a.mass == 0.0) continue;
                acc += a.mass;
                last = a.position;
                if (target < acc) return a.position;
            }
            return last;
        }
    }
    throw InvalidArgument("sample_band: unknown family");
}

bool satisfies_levy_integrability(const LevyMeasure& m, const quad::Options& opt) {
    try {
        const double v = band_integral(
            m,
            [](double y) {
                const double r = std::min(std::abs(y), 1.0);
                return r * r;
            },
            Band{0.0, kInf}, opt);
        return std::isfinite(v);
    } catch (const DivergenceError&) {
        return false;
    }
}

}  // namespace jsde
