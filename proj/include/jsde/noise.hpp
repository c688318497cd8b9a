#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsde/levy.hpp"

namespace jsde {

struct JumpEvent {
    double time = 0.0;
    double mark = 0.0;

    bool operator==(const JumpEvent&) const = default;
};

/// One realization of the driving noise on (0, horizon].
///
/// Brownian increments live on the base grid t_k = k * base_step; the last
/// cell ends at grid_end. Restricting a path to an earlier horizon keeps the
/// stored increment of the cell that is cut, and cell_increment() rescales it
/// by the elapsed fraction, so a solver stepping through a truncated path
/// performs exactly the same arithmetic as on the full one.
struct NoisePath {
    double horizon = 0.0;
    double base_step = 0.0;
    double grid_end = 0.0;
    double cutoff_c = 0.0;
    double truncation_eps = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> brownian_increments;
    std::vector<JumpEvent> big_jumps;    // |mark| > cutoff_c
    std::vector<JumpEvent> small_jumps;  // truncation_eps < |mark| <= cutoff_c

    std::size_t cell_count() const noexcept { return brownian_increments.size(); }
    double cell_start(std::size_t k) const noexcept { return static_cast<double>(k) * base_step; }
    // End of cell k on the generation grid.
    double cell_nominal_end(std::size_t k) const noexcept;
    // End of cell k clipped to the horizon.
    double cell_end(std::size_t k) const noexcept;
    double cell_nominal_length(std::size_t k) const noexcept {
        return cell_nominal_end(k) - cell_start(k);
    }
    // Brownian increment over [cell_start(k), cell_end(k)].
    double cell_increment(std::size_t k) const noexcept;

    bool operator==(const NoisePath&) const = default;
};

// Number of base cells covering (0, horizon] at the given step.
std::size_t cell_count_for(double horizon, double base_step);

/// Seeded noise: Brownian increments, big jumps from nu on |y| > c and small
/// jumps from nu on eps < |y| <= c, each from its own substream of the seed.
/// Event times are Poisson arrivals (exponential spacings) on (0, horizon].
NoisePath generate(const LevyMeasure& measure, double horizon, double base_step, double cutoff_c,
                   double truncation_eps, std::uint64_t seed);

// Noise restricted to (0, t): cells starting before t, events strictly before t.
NoisePath split_before(const NoisePath& noise, double t);

// Same Brownian path on a grid `factor` times coarser (increments summed).
// The horizon must be a whole number of fine cells.
NoisePath coarsen(const NoisePath& noise, std::size_t factor);

// Fixed-width little-endian binary format.
std::vector<std::uint8_t> serialize(const NoisePath& noise);
NoisePath deserialize(std::span<const std::uint8_t> bytes);

// CSV rows (kind, time, value) with kind in {bm, big, small}; bm rows carry the
// cell start time and the cell increment.
void write_csv(std::ostream& os, const NoisePath& noise);

/// File cache of generated noise keyed by the generation arguments.
class NoiseCache {
public:
    explicit NoiseCache(std::string directory) : dir_(std::move(directory)) {}

    // Reads $JSDE_CACHE_DIR; empty optional when unset.
    static std::optional<NoiseCache> from_environment();

    NoisePath load_or_generate(const LevyMeasure& measure, double horizon, double base_step,
                               double cutoff_c, double truncation_eps, std::uint64_t seed) const;

    std::string key_path(const LevyMeasure& measure, double horizon, double base_step,
                         double cutoff_c, double truncation_eps, std::uint64_t seed) const;

private:
    std::string dir_;
};

}  // namespace jsde
