#pragma once

#include <functional>

namespace jsde::quad {

struct Options {
    double rel_tol = 1e-10;
    double overflow_guard = 1e12;
};

using Integrand = std::function<double(double)>;

// Integral over a finite interval [a, b]; the interval is cut into panels of
// width at most one and each panel is integrated with adaptive Gauss-Kronrod.
double finite(const Integrand& f, double a, double b, const Options& opt = {});

// Integral over [a, +inf) when direction > 0, over (-inf, a] when direction < 0.
//
// Unit-width panels are summed outward. Once successive panel contributions
// settle to a constant ratio q (exponential decay in the panel variable,
// which is what a power law looks like after the substitution y = e^-u), the
// remaining geometric tail is added in closed form. A ratio settling at q >= 1
// or a running sum above the overflow guard raises DivergenceError.
double semi_infinite(const Integrand& f, double a, int direction, const Options& opt = {});

}  // namespace jsde::quad
