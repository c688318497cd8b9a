#include "jsde/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <string>

#include "jsde/error.hpp"

namespace jsde::quad {
namespace {

constexpr unsigned kMaxDepth = 6;  // 64 sub-panels per unit panel; bounds the work on noisy integrands
constexpr int kMaxPanels = 760;  // e^-760 is below the smallest subnormal

double panel(const Integrand& f, double a, double b, const Options& opt) {
    auto guarded = [&](double u) {
        const double v = f(u);
        if (!std::isfinite(v)) {
            throw DivergenceError("integrand is not finite at u = " + std::to_string(u));
        }
        return v;
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(guarded, a, b, kMaxDepth,
                                                                         opt.rel_tol, &err);
}

void guard(double sum, const Options& opt) {
    if (!std::isfinite(sum) || std::abs(sum) > opt.overflow_guard) {
        throw DivergenceError("integral exceeds overflow guard");
    }
}

}  // namespace

double finite(const Integrand& f, double a, double b, const Options& opt) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        throw InvalidArgument("quad::finite: lower limit above upper limit");
    }
    const double width = b - a;
    const auto panels = static_cast<long>(std::ceil(width));
    if (panels <= 1) {
        const double v = panel(f, a, b, opt);
        guard(v, opt);
        return v;
    }
    double sum = 0.0;
    for (long k = 0; k < panels; ++k) {
        const double lo = a + width * static_cast<double>(k) / static_cast<double>(panels);
        const double hi = (k + 1 == panels)
                              ? b
                              : a + width * static_cast<double>(k + 1) / static_cast<double>(panels);
        sum += panel(f, lo, hi, opt);
        guard(sum, opt);
    }
    return sum;
}

double semi_infinite(const Integrand& f, double a, int direction, const Options& opt) {
    const double step = direction > 0 ? 1.0 : -1.0;
    double sum = 0.0;
    double prev = 0.0;
    double prev_ratio = std::numeric_limits<double>::quiet_NaN();
    int stable = 0;
    int negligible = 0;
    int growing = 0;

    for (int k = 0; k < kMaxPanels; ++k) {
        const double u0 = a + step * k;
        const double u1 = a + step * (k + 1);
        const double p = direction > 0 ? panel(f, u0, u1, opt) : panel(f, u1, u0, opt);
        sum += p;
        guard(sum, opt);

        if (std::abs(p) <= 1e-3 * opt.rel_tol * std::abs(sum) || (p == 0.0 && sum == 0.0)) {
            if (++negligible >= 4) return sum;
        } else {
            negligible = 0;
        }

        if (prev != 0.0 && p != 0.0 && (p > 0.0) == (prev > 0.0)) {
            const double q = p / prev;
            growing = q >= 1.0 ? growing + 1 : 0;
            if (growing >= 40) {
                throw DivergenceError("panel contributions do not decay");
            }
            if (std::abs(q - prev_ratio) <= 1e-9 * q) {
                if (++stable >= 2) {
                    if (q >= 1.0 - 1e-12) {
                        throw DivergenceError("panel contributions settle at ratio >= 1");
                    }
                    sum += p * q / (1.0 - q);
                    guard(sum, opt);
                    return sum;
                }
            } else {
                stable = 0;
            }
            prev_ratio = q;
        } else {
            stable = 0;
            prev_ratio = std::numeric_limits<double>::quiet_NaN();
        }
        prev = p;
    }
    if (negligible > 0) return sum;
    throw DivergenceError("semi-infinite integral did not settle");
}

}  // namespace jsde::quad
