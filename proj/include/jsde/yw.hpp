#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "jsde/error.hpp"
#include "jsde/model.hpp"

namespace jsde {

// Raised when a level cannot be bracketed; carries the deepest level reached.
class LevelsError : public NumericalError {
public:
    LevelsError(const std::string& what, int deepest_n, double deepest_log_level)
        : NumericalError(what), deepest_n_(deepest_n), deepest_log_level_(deepest_log_level) {}
    int deepest_n() const noexcept { return deepest_n_; }
    double deepest_log_level() const noexcept { return deepest_log_level_; }

private:
    int deepest_n_;
    double deepest_log_level_;
};

/// log a_n for n = 0..n_max with a_0 = 1 and int_{a_n}^{a_{n-1}} h^-2 = n.
///
/// Each level is found by bisection on log a_n; the integral is continuous and
/// strictly increasing as a_n decreases, and divergence of h^-2 at zero
/// guarantees a root. Levels are kept in log space because for h = sqrt(u)
/// they decay like exp(-n(n+1)/2).
std::vector<double> compute_log_levels(const Modulus& h, int n_max);

/// Shape of rho_n = kappa * tau * h^-2 on (a_n, a_{n-1}); tau is piecewise
/// linear in log v, zero at both ends and one in the middle.
struct DensityTaper {
    int n = 1;
    double log_lo = 0.0;  // log a_n
    double log_hi = 0.0;  // log a_{n-1}
    double fraction = 0.1;  // taper width as a fraction of the log-length
    double kappa = 1.0;
    int shrinks = 0;

    double knot_lo() const noexcept { return log_lo + fraction * (log_hi - log_lo); }
    double knot_hi() const noexcept { return log_hi - fraction * (log_hi - log_lo); }
    double tau(double s) const noexcept;
};

// Shrinks the taper from a 10% log-width until int tau h^-2 >= n / 2, then
// normalizes; kappa <= 2 / n follows. `nodes` sets the table resolution used
// to measure the mass.
DensityTaper build_density(const Modulus& h, double log_lo, double log_hi, int n,
                           std::size_t nodes = 4096);

/// Levels a_n, densities rho_n and the C^2 approximations
///   psi_n(y) = int_0^|y| int_0^r rho_n(v) dv dr
/// of |y|. Evaluation uses per-level cumulative tables on log-spaced nodes
/// (taper knots are nodes) plus a 10-point Gauss-Legendre rule inside the
/// cell that contains |y|.
class ApproximationSequence {
public:
    static ApproximationSequence build(const Modulus& h, int n_max = 20, std::size_t nodes = 4096);

    int n_max() const noexcept { return static_cast<int>(levels_.size()); }
    const Modulus& modulus() const noexcept { return h_; }

    double log_level(int n) const;  // n = 0..n_max
    double level(int n) const;
    const DensityTaper& density(int n) const;

    double rho(int n, double v) const;
    double psi(int n, double y) const;
    double psi_prime(int n, double y) const;
    double psi_second(int n, double y) const { return rho(n, y < 0.0 ? -y : y); }

    // psi_n(y) = |y| - offset(n) for |y| >= a_{n-1}; offset lies in [a_n, a_{n-1}].
    double offset(int n) const;
    // int rho_n as assembled in the tables (one up to rounding).
    double total_mass(int n) const;

private:
    struct Level {
        DensityTaper taper;
        std::vector<double> s;     // log-nodes
        std::vector<double> v;     // exp(s)
        std::vector<double> dpsi;  // psi' at nodes
        std::vector<double> psi;   // psi at nodes
        double top_offset = 0.0;
    };

    const Level& at(int n) const;
    double rho_log(const Level& L, double s) const;  // rho(e^s) e^s
    std::size_t cell_of(const Level& L, double s) const;

    Modulus h_;
    std::vector<double> log_levels_;
    std::vector<Level> levels_;
};

// Log-spaced |y| grid per level covering the support with margins, mirrored to
// negative y, plus zero.
std::vector<double> psi_grid(const ApproximationSequence& seq, int n, std::size_t points_per_side = 64);

// Rows n,y,psi,psi_prime,psi_second preceded by '#' header lines listing the
// levels.
void write_psi_table(std::ostream& os, const ApproximationSequence& seq, int n_max,
                     const std::vector<double>* fixed_grid = nullptr);

}  // namespace jsde
