#include "jsde/yw.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <limits>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace jsde {
namespace {

using Gauss10 = boost::math::quadrature::gauss<double, 10>;

// Integral of h^-2 over (e^lo, e^hi), infinity on overflow.
double level_integral(const Modulus& h, double lo, double hi) {
    const double v = h.inverse_square_integral_log(lo, hi);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

struct Tables {
    std::vector<double> s, v, dpsi, psi;
};

// Node positions: taper segments get 1/8 of the cells each, the flat middle
// the rest, so the knots of tau are nodes.
std::vector<double> log_nodes(const DensityTaper& t, std::size_t nodes) {
    const std::size_t cells = std::max<std::size_t>(nodes, 16) - 1;
    const std::size_t taper_cells = cells / 8;
    const std::size_t mid_cells = cells - 2 * taper_cells;
    const double k0 = t.log_lo, k1 = t.knot_lo(), k2 = t.knot_hi(), k3 = t.log_hi;
    std::vector<double> s;
    s.reserve(cells + 1);
    auto segment = [&s](double a, double b, std::size_t m) {
        for (std::size_t i = 0; i < m; ++i) s.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(m));
    };
    segment(k0, k1, taper_cells);
    segment(k1, k2, mid_cells);
    segment(k2, k3, taper_cells);
    s.push_back(k3);
    return s;
}

// Cumulative psi' and psi at the nodes for density kappa * tau * h^-2.
Tables assemble(const Modulus& h, const DensityTaper& t, std::size_t nodes) {
    Tables out;
    out.s = log_nodes(t, nodes);
    const std::size_t m = out.s.size();
    out.v.resize(m);
    out.dpsi.assign(m, 0.0);
    out.psi.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) out.v[i] = std::exp(out.s[i]);
    auto rho_log = [&](double s) { return t.kappa * t.tau(s) * h.inverse_square_log_density(s); };
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double a = out.s[j], b = out.s[j + 1];
        const double mass = Gauss10::integrate(rho_log, a, b);
        // int (v_{j+1} - e^u) rho(e^u) e^u du
        const double moment = Gauss10::integrate(
            [&](double u) { return out.v[j + 1] * -std::expm1(u - b) * rho_log(u); }, a, b);
        out.dpsi[j + 1] = out.dpsi[j] + mass;
        out.psi[j + 1] = out.psi[j] + out.dpsi[j] * (out.v[j + 1] - out.v[j]) + moment;
    }
    return out;
}

}  // namespace

std::vector<double> compute_log_levels(const Modulus& h, int n_max) {
    if (n_max < 1) throw InvalidArgument("compute_log_levels: n_max must be at least 1");
    const auto divergence = check_modulus_divergence(h, 1.0);
    if (divergence.verdict == Verdict::Fail) {
        throw LevelsError("modulus fails the divergence condition; levels do not exist", 0, 0.0);
    }
    constexpr double kDeepest = -1e7;
    std::vector<double> logs{0.0};
    logs.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 1; n <= n_max; ++n) {
        const double top = logs.back();
        const double target = static_cast<double>(n);
        double hi = top;  // integral 0 < n
        double step = 1.0;
        double lo = top - step;
        while (level_integral(h, lo, top) < target) {
            hi = lo;
            step *= 2.0;
            lo = top - step;
            if (lo < kDeepest) {
                throw LevelsError("level a_" + std::to_string(n) + " not bracketed above exp(" +
                                      std::to_string(kDeepest) + ")",
                                  n - 1, top);
            }
        }
        // Invariant: integral(lo) >= n > integral(hi).
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (level_integral(h, mid, top) >= target) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) break;
        }
        logs.push_back(0.5 * (lo + hi));
    }
    return logs;
}

double DensityTaper::tau(double s) const noexcept {
    if (s <= log_lo || s >= log_hi) return 0.0;
    const double k1 = knot_lo(), k2 = knot_hi();
    if (s < k1) return (s - log_lo) / (k1 - log_lo);
    if (s > k2) return (log_hi - s) / (log_hi - k2);
    return 1.0;
}

DensityTaper build_density(const Modulus& h, double log_lo, double log_hi, int n, std::size_t nodes) {
    if (!(log_lo < log_hi)) throw InvalidArgument("build_density: empty support");
    if (n < 1) throw InvalidArgument("build_density: n must be at least 1");
    DensityTaper t;
    t.n = n;
    t.log_lo = log_lo;
    t.log_hi = log_hi;
    t.fraction = 0.1;
    t.kappa = 1.0;
    for (int shrink = 0; shrink <= 60; ++shrink) {
        t.shrinks = shrink;
        const Tables raw = assemble(h, t, nodes);
        const double mass = raw.dpsi.back();
        if (mass >= 0.5 * n && std::isfinite(mass)) {
            t.kappa = 1.0 / mass;
            return t;
        }
        t.fraction *= 0.5;
    }
    throw NumericalError("build_density: taper shrink failed for n = " + std::to_string(n));
}

ApproximationSequence ApproximationSequence::build(const Modulus& h, int n_max, std::size_t nodes) {
    ApproximationSequence seq;
    seq.h_ = h;
    seq.log_levels_ = compute_log_levels(h, n_max);
    seq.levels_.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
        Level L;
        L.taper = build_density(h, seq.log_levels_[n], seq.log_levels_[n - 1], n, nodes);
        Tables tab = assemble(h, L.taper, nodes);
        L.s = std::move(tab.s);
        L.v = std::move(tab.v);
        L.dpsi = std::move(tab.dpsi);
        L.psi = std::move(tab.psi);
        L.top_offset = L.v.back() - L.psi.back();
        seq.levels_.push_back(std::move(L));
    }
    return seq;
}

const ApproximationSequence::Level& ApproximationSequence::at(int n) const {
    if (n < 1 || n > n_max()) throw InvalidArgument("approximation index out of range: " + std::to_string(n));
    return levels_[static_cast<std::size_t>(n - 1)];
}

double ApproximationSequence::log_level(int n) const {
    if (n < 0 || n > n_max()) throw InvalidArgument("level index out of range: " + std::to_string(n));
    return log_levels_[static_cast<std::size_t>(n)];
}

double ApproximationSequence::level(int n) const { return std::exp(log_level(n)); }

const DensityTaper& ApproximationSequence::density(int n) const { return at(n).taper; }

double ApproximationSequence::offset(int n) const { return at(n).top_offset; }

double ApproximationSequence::total_mass(int n) const { return at(n).dpsi.back(); }

double ApproximationSequence::rho_log(const Level& L, double s) const {
    return L.taper.kappa * L.taper.tau(s) * h_.inverse_square_log_density(s);
}

std::size_t ApproximationSequence::cell_of(const Level& L, double s) const {
    auto it = std::upper_bound(L.s.begin(), L.s.end(), s);
    std::size_t j = static_cast<std::size_t>(it - L.s.begin());
    j = j == 0 ? 0 : j - 1;
    return std::min(j, L.s.size() - 2);
}

double ApproximationSequence::rho(int n, double v) const {
    const Level& L = at(n);
    if (!(v > 0.0)) return 0.0;
    // Closed support: zero at both levels even where log(exp(s)) != s.
    if (v <= L.v.front() || v >= L.v.back()) return 0.0;
    const double s = std::log(v);
    const double tau = L.taper.tau(s);
    if (tau == 0.0) return 0.0;
    const double hv = h_(v);
    return L.taper.kappa * tau / (hv * hv);
}

double ApproximationSequence::psi_prime(int n, double y) const {
    const Level& L = at(n);
    const double r = std::abs(y);
    const double sign = y < 0.0 ? -1.0 : 1.0;
    if (r <= L.v.front()) return 0.0;
    if (r >= L.v.back()) return sign;
    const double s = std::log(r);
    const std::size_t j = cell_of(L, s);
    const double partial = Gauss10::integrate([&](double u) { return rho_log(L, u); }, L.s[j], s);
    return sign * std::clamp(L.dpsi[j] + partial, 0.0, 1.0);
}

double ApproximationSequence::psi(int n, double y) const {
    const Level& L = at(n);
    const double r = std::abs(y);
    if (r <= L.v.front()) return 0.0;
    if (r >= L.v.back()) return r - L.top_offset;
    const double s = std::log(r);
    const std::size_t j = cell_of(L, s);
    const double inner = Gauss10::integrate(
        [&](double u) { return r * -std::expm1(u - s) * rho_log(L, u); }, L.s[j], s);
    return L.psi[j] + L.dpsi[j] * (r - L.v[j]) + inner;
}

std::vector<double> psi_grid(const ApproximationSequence& seq, int n, std::size_t points_per_side) {
    const double lo = seq.log_level(n) - std::log(4.0);
    const double hi = seq.log_level(n - 1) + std::log(4.0);
    std::vector<double> pos;
    for (std::size_t i = 0; i < points_per_side; ++i) {
        const double f = points_per_side == 1 ? 0.0 : static_cast<double>(i) / (points_per_side - 1);
        pos.push_back(std::exp(lo + (hi - lo) * f));
    }
    std::vector<double> grid;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
    grid.push_back(0.0);
    grid.insert(grid.end(), pos.begin(), pos.end());
    return grid;
}

void write_psi_table(std::ostream& os, const ApproximationSequence& seq, int n_max,
                     const std::vector<double>* fixed_grid) {
    char buf[160];
    os << "# modulus: " << seq.modulus().describe() << "\n# levels:";
    for (int n = 1; n <= n_max; ++n) {
        std::snprintf(buf, sizeof buf, " a_%d=%.17g", n, seq.level(n));
        os << buf;
    }
    os << "\n# log_levels:";
    for (int n = 1; n <= n_max; ++n) {
        std::snprintf(buf, sizeof buf, " %.17g", seq.log_level(n));
        os << buf;
    }
    os << "\nn,y,psi,psi_prime,psi_second\n";
    for (int n = 1; n <= n_max; ++n) {
        const std::vector<double> grid = fixed_grid ? *fixed_grid : psi_grid(seq, n);
        for (double y : grid) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", n, y, seq.psi(n, y),
                          seq.psi_prime(n, y), seq.psi_second(n, y));
            os << buf;
        }
    }
}

}  // namespace jsde
