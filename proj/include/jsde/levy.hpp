#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jsde/quadrature.hpp"
#include "jsde/rng.hpp"

namespace jsde {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Jump-size band {lo < |y| <= hi}.
struct Band {
    double lo = 0.0;
    double hi = kInf;

    // Throws InvalidArgument unless 0 <= lo < hi <= inf.
    void validate() const;
    bool contains(double y) const;
};

enum class LevyFamily { Stable, TemperedStable, FiniteAtoms, Custom };

std::string to_string(LevyFamily f);

struct Atom {
    double position = 0.0;
    double mass = 0.0;
};

/// Jump intensity measure nu on R \ {0}.
///
/// Either a Lebesgue density (stable, tempered stable, custom) or a finite
/// list of atoms. The stable family is symmetric with density
/// scale * |y|^(-1-alpha); tempered stable multiplies by exp(-tempering |y|).
/// Custom densities carry a symmetric stable envelope that must dominate the
/// density wherever sample_band is used. Values are immutable once built.
class LevyMeasure {
public:
    static LevyMeasure stable(double alpha, double scale = 1.0);
    static LevyMeasure tempered_stable(double alpha, double scale, double tempering);
    static LevyMeasure finite_atoms(std::vector<Atom> atoms);
    static LevyMeasure zero() { return finite_atoms({}); }
    static LevyMeasure custom(std::function<double(double)> density, double envelope_alpha,
                              double envelope_scale);

    LevyFamily family() const noexcept { return family_; }
    double alpha() const noexcept { return alpha_; }
    double scale() const noexcept { return scale_; }
    double tempering() const noexcept { return tempering_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    bool has_density() const noexcept { return family_ != LevyFamily::FiniteAtoms; }

    // Lebesgue density at y != 0 (zero for atom measures).
    double density(double y) const;

    // r * density(r) computed without forming the singular factor; used by the
    // log-substituted quadrature.
    double weighted_density(double y) const;

    // Closed-form |y|^p moment over a band when the family has one (stable
    // family only). Returns +inf for a divergent moment.
    std::optional<double> closed_form_abs_moment(double p, const Band& band) const;

private:
    LevyFamily family_ = LevyFamily::FiniteAtoms;
    double alpha_ = 0.0;
    double scale_ = 0.0;
    double tempering_ = 0.0;
    std::vector<Atom> atoms_;
    std::function<double(double)> custom_density_;
};

/// Integral of g over the band against nu.
///
/// Atom measures are summed exactly. Density measures are integrated per sign
/// after substituting y = +-e^-u, which turns the power singularity at zero
/// into an exponential in u. Throws DivergenceError when the estimate exceeds
/// the overflow guard or does not settle, InvalidArgument for a bad band.
double band_integral(const LevyMeasure& m, const std::function<double(double)>& g, const Band& band,
                     const quad::Options& opt = {});

// Integral of |y|^p over the band; closed form where available, quadrature
// otherwise.
double band_moment(const LevyMeasure& m, double p, const Band& band, const quad::Options& opt = {});

// nu(band).
inline double band_mass(const LevyMeasure& m, const Band& band, const quad::Options& opt = {}) {
    return band_moment(m, 0.0, band, opt);
}

// nu({|y| > c}): the rate of the big-jump compound Poisson process.
double tail_mass(const LevyMeasure& m, double c, const quad::Options& opt = {});

// Draws a jump mark from nu restricted to the band and normalized.
double sample_band(const LevyMeasure& m, const Band& band, Rng& rng);

// Integrability check: the integral of min(|y|,1)^2 against nu is finite.
bool satisfies_levy_integrability(const LevyMeasure& m, const quad::Options& opt = {});

}  // namespace jsde
