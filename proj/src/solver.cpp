#include "jsde/solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "jsde/error.hpp"

namespace jsde {

std::vector<double> SolutionPath::grid_times() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (kinds[i] & kGridPoint) out.push_back(times[i]);
    }
    return out;
}

std::vector<double> SolutionPath::grid_values() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (kinds[i] & kGridPoint) out.push_back(values[i]);
    }
    return out;
}

Solver::Solver(JumpSDEModel model, double truncation_eps, SolverOptions opt)
    : model_(std::move(model)), eps_(truncation_eps), opt_(opt) {
    if (!(eps_ > 0.0 && eps_ < model_.cutoff_c)) {
        throw InvalidArgument("solver: need 0 < truncation_eps < cutoff_c");
    }
    compensator_ = model_.compensator(Band{eps_, model_.cutoff_c}, opt_.quad);
}

SolutionPath Solver::solve(const NoisePath& noise, double x0) const {
    if (noise.cutoff_c != model_.cutoff_c) {
        throw InvalidArgument("solver: noise cutoff does not match the model cutoff");
    }
    if (noise.truncation_eps != eps_) {
        throw InvalidArgument("solver: noise truncation level does not match the solver");
    }
    if (!std::isfinite(x0)) throw InvalidArgument("solver: initial value must be finite");

    const JumpSDEModel& m = model_;
    SolutionPath path;
    path.gate_verdict = opt_.gate_verdict;
    const std::size_t expected = noise.cell_count() + noise.big_jumps.size() + noise.small_jumps.size() + 1;
    path.times.reserve(expected);
    path.values.reserve(expected);
    path.kinds.reserve(expected);

    if (opt_.report_omitted_variance && m.levy.has_density()) {
        try {
            if (m.small_jump_factor) {
                const double f = m.small_jump_factor(0.0, x0);
                path.omitted_variance =
                    f == 0.0 ? 0.0 : noise.horizon * f * f * band_moment(m.levy, 2.0, Band{0.0, eps_}, opt_.quad);
            } else {
                path.omitted_variance =
                    noise.horizon * band_integral(
                                        m.levy,
                                        [&](double y) {
                                            const double f = m.small_jump(0.0, x0, y);
                                            return f * f;
                                        },
                                        Band{0.0, eps_}, opt_.quad);
            }
        } catch (const DivergenceError&) {
            path.omitted_variance = std::numeric_limits<double>::infinity();
        }
    }

    double x = x0;
    double cur = 0.0;
    path.times.push_back(0.0);
    path.values.push_back(x);
    path.kinds.push_back(kGridPoint);

    std::size_t ib = 0, is = 0;
    const auto& big = noise.big_jumps;
    const auto& small = noise.small_jumps;

    auto blown = [&](double at) {
        if (std::isfinite(x) && std::abs(x) <= opt_.overflow_guard) return false;
        path.blow_up_time = at;
        return true;
    };

    // Euler step from `cur` to `next` with the given Brownian increment.
    auto advance = [&](double next, double dw) {
        const double dt = next - cur;
        x = x + m.drift(cur, x) * dt + m.diffusion(cur, x) * dw - dt * compensator_(cur, x);
        cur = next;
    };

    for (std::size_t k = 0; k < noise.cell_count(); ++k) {
        const double end = noise.cell_end(k);
        const double len = noise.cell_nominal_length(k);
        const double inc = noise.brownian_increments[k];

        for (;;) {
            const bool has_big = ib < big.size() && big[ib].time <= end;
            const bool has_small = is < small.size() && small[is].time <= end;
            if (!has_big && !has_small) break;
            const bool take_big = has_big && (!has_small || big[ib].time <= small[is].time);
            const JumpEvent& ev = take_big ? big[ib++] : small[is++];

            advance(ev.time, inc * ((ev.time - cur) / len));
            if (blown(ev.time)) return path;
            const double left = x;
            const double jump = take_big ? m.big_jump(ev.time, left, ev.mark) : m.small_jump(ev.time, left, ev.mark);
            x = left + jump;
            if (blown(ev.time)) return path;

            std::uint8_t kind = take_big ? kBigJumpPoint : kSmallJumpPoint;
            if (ev.time == end) kind |= kGridPoint;
            path.jumps.push_back({path.times.size(), ev.time, ev.mark, left, jump, take_big});
            path.times.push_back(ev.time);
            path.values.push_back(x);
            path.kinds.push_back(kind);
        }

        if (cur < end) {
            advance(end, inc * ((end - cur) / len));
            if (blown(end)) return path;
            path.times.push_back(end);
            path.values.push_back(x);
            path.kinds.push_back(kGridPoint);
        } else {
            path.kinds.back() |= kGridPoint;
        }
    }
    return path;
}

SolutionPath solve(const JumpSDEModel& m, const NoisePath& noise, double x0, const SolverOptions& opt) {
    return Solver(m, noise.truncation_eps, opt).solve(noise, x0);
}

void write_path_csv(std::ostream& os, const SolutionPath& path) {
    char buf[128];
    os << "time,x,is_jump,jump_kind\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        const std::uint8_t k = path.kinds[i];
        const char* kind = (k & kBigJumpPoint) ? "big" : (k & kSmallJumpPoint) ? "small" : "none";
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%s\n", path.times[i], path.values[i],
                      (k & (kBigJumpPoint | kSmallJumpPoint)) ? 1 : 0, kind);
        os << buf;
    }
}

}  // namespace jsde
