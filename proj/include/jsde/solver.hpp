#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "jsde/model.hpp"
#include "jsde/noise.hpp"

namespace jsde {

enum PointKind : std::uint8_t {
    kGridPoint = 1,
    kBigJumpPoint = 2,
    kSmallJumpPoint = 4,
};

struct JumpRecord {
    std::size_t index = 0;  // position in SolutionPath::times
    double time = 0.0;
    double mark = 0.0;
    double left_limit = 0.0;  // X_{t-}
    double increment = 0.0;   // f(t, X_{t-}, mark); X_t = X_{t-} + increment
    bool big = false;

    bool operator==(const JumpRecord&) const = default;
};

/// Discrete solution on the event-augmented grid (base grid plus every jump
/// time). values[i] is the cadlag value X_{times[i]}; left limits at jump
/// times are kept in `jumps`.
struct SolutionPath {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::uint8_t> kinds;  // PointKind bit set
    std::vector<JumpRecord> jumps;
    std::optional<double> blow_up_time;
    std::optional<bool> gate_verdict;
    // horizon * int_{|y|<=eps} f2(0, x0, y)^2 nu(dy): variance bound of the
    // omitted sub-eps jumps.
    double omitted_variance = 0.0;

    bool blew_up() const noexcept { return blow_up_time.has_value(); }
    std::vector<double> grid_times() const;
    std::vector<double> grid_values() const;

    bool operator==(const SolutionPath&) const = default;
};

struct SolverOptions {
    double overflow_guard = 1e12;
    bool report_omitted_variance = true;
    std::optional<bool> gate_verdict;
    quad::Options quad{};
};

/// Interlacing Euler scheme. Between events the state advances by
///   b(t,X) dt + sigma(t,X) dW - dt * int_{eps<|y|<=c} f2(t,X,y) nu(dy)
/// with coefficients frozen at the left end; at a small-jump time
/// X = X- + f2(t, X-, y), at a big-jump time X = X- + f1(t, X-, y). Jumps
/// below eps are dropped together with their compensator. Sub-cell Brownian
/// increments are the cell increment scaled by the elapsed fraction of the
/// cell.
class Solver {
public:
    Solver(JumpSDEModel model, double truncation_eps, SolverOptions opt = {});

    SolutionPath solve(const NoisePath& noise, double x0) const;

    const JumpSDEModel& model() const noexcept { return model_; }
    double truncation_eps() const noexcept { return eps_; }

private:
    JumpSDEModel model_;
    double eps_;
    SolverOptions opt_;
    Coefficient compensator_;
};

// One-shot convenience wrapper around Solver.
SolutionPath solve(const JumpSDEModel& m, const NoisePath& noise, double x0, const SolverOptions& opt = {});

// CSV with columns time,x,is_jump,jump_kind (jump_kind in {none,big,small}).
void write_path_csv(std::ostream& os, const SolutionPath& path);

}  // namespace jsde
