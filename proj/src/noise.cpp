#include "jsde/noise.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>

#include "jsde/error.hpp"

namespace jsde {
namespace {

enum Stream : std::uint64_t { kBrownian = 0, kBig = 1, kSmall = 2 };

constexpr double kMaxExpectedEvents = 5e7;

std::vector<JumpEvent> poisson_events(const LevyMeasure& m, const Band& band, double rate,
                                      double horizon, Rng rng) {
    std::vector<JumpEvent> events;
    if (!(rate > 0.0)) return events;
    if (rate * horizon > kMaxExpectedEvents) {
        throw DivergenceError("expected jump count " + std::to_string(rate * horizon) +
                              " exceeds the simulation budget; raise truncation_eps");
    }
    double t = 0.0;
    for (;;) {
        const double next = t - std::log(rng.uniform_open()) / rate;
        if (next > horizon) break;
        if (next <= t) continue;
        t = next;
        events.push_back({t, sample_band(m, band, rng)});
    }
    return events;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t v = 0;
    std::memcpy(&v, &d, sizeof v);
    put_u64(out, v);
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

    std::uint64_t u64() {
        if (pos_ + 8 > bytes_.size()) throw InvalidArgument("noise blob truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t v = u64();
        double d = 0.0;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr std::uint64_t kMagic = 0x31304e5045445346ULL;  // "FSDEPN01"

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_float(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", d);
    return buf;
}

}  // namespace

std::size_t cell_count_for(double horizon, double base_step) {
    const double cells = std::ceil(horizon / base_step - 1e-9);
    return cells < 1.0 ? 1 : static_cast<std::size_t>(cells);
}

double NoisePath::cell_nominal_end(std::size_t k) const noexcept {
    if (k + 1 >= cell_count_for(grid_end, base_step)) return grid_end;
    return static_cast<double>(k + 1) * base_step;
}

double NoisePath::cell_end(std::size_t k) const noexcept {
    const double e = cell_nominal_end(k);
    return e < horizon ? e : horizon;
}

double NoisePath::cell_increment(std::size_t k) const noexcept {
    const double e = cell_nominal_end(k);
    if (e <= horizon) return brownian_increments[k];
    return brownian_increments[k] * ((horizon - cell_start(k)) / (e - cell_start(k)));
}

NoisePath generate(const LevyMeasure& measure, double horizon, double base_step, double cutoff_c,
                   double truncation_eps, std::uint64_t seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("generate: horizon must be positive and finite");
    }
    if (!(base_step > 0.0) || !std::isfinite(base_step)) {
        throw InvalidArgument("generate: base_step must be positive and finite");
    }
    if (!(truncation_eps > 0.0 && truncation_eps < cutoff_c) || !std::isfinite(cutoff_c)) {
        throw InvalidArgument("generate: need 0 < truncation_eps < cutoff_c");
    }

    NoisePath p;
    p.horizon = horizon;
    p.grid_end = horizon;
    p.base_step = base_step;
    p.cutoff_c = cutoff_c;
    p.truncation_eps = truncation_eps;
    p.seed = seed;

    const std::size_t cells = cell_count_for(horizon, base_step);
    p.brownian_increments.resize(cells);
    Rng bm = Rng::substream(seed, kBrownian);
    for (std::size_t k = 0; k < cells; ++k) {
        p.brownian_increments[k] = std::sqrt(p.cell_nominal_length(k)) * bm.normal();
    }

    const Band big{cutoff_c, kInf};
    const Band small{truncation_eps, cutoff_c};
    p.big_jumps = poisson_events(measure, big, band_mass(measure, big), horizon,
                                 Rng::substream(seed, kBig));
    p.small_jumps = poisson_events(measure, small, band_mass(measure, small), horizon,
                                   Rng::substream(seed, kSmall));
    return p;
}

NoisePath split_before(const NoisePath& noise, double t) {
    if (!(t > 0.0 && t <= noise.horizon)) {
        throw InvalidArgument("split_before: need 0 < t <= horizon");
    }
    NoisePath out = noise;
    out.horizon = t;
    std::size_t keep = 0;
    while (keep < noise.cell_count() && noise.cell_start(keep) < t) ++keep;
    out.brownian_increments.resize(keep);
    auto before = [t](const std::vector<JumpEvent>& ev) {
        std::vector<JumpEvent> r;
        for (const auto& e : ev) {
            if (e.time < t) r.push_back(e);
        }
        return r;
    };
    out.big_jumps = before(noise.big_jumps);
    out.small_jumps = before(noise.small_jumps);
    return out;
}

NoisePath coarsen(const NoisePath& noise, std::size_t factor) {
    if (factor == 0) throw InvalidArgument("coarsen: factor must be positive");
    if (noise.horizon != noise.grid_end) throw InvalidArgument("coarsen: path was truncated");
    const std::size_t fine = noise.cell_count();
    if (fine % factor != 0) throw InvalidArgument("coarsen: cell count not divisible by factor");
    NoisePath out = noise;
    out.base_step = noise.base_step * static_cast<double>(factor);
    out.brownian_increments.assign(fine / factor, 0.0);
    for (std::size_t k = 0; k < fine; ++k) {
        out.brownian_increments[k / factor] += noise.brownian_increments[k];
    }
    if (cell_count_for(out.grid_end, out.base_step) != out.cell_count()) {
        throw InvalidArgument("coarsen: coarse grid does not tile the horizon");
    }
    return out;
}

std::vector<std::uint8_t> serialize(const NoisePath& noise) {
    std::vector<std::uint8_t> out;
    out.reserve(8 * (12 + noise.cell_count() + 2 * (noise.big_jumps.size() + noise.small_jumps.size())));
    put_u64(out, kMagic);
    put_u64(out, noise.seed);
    put_f64(out, noise.horizon);
    put_f64(out, noise.base_step);
    put_f64(out, noise.grid_end);
    put_f64(out, noise.cutoff_c);
    put_f64(out, noise.truncation_eps);
    put_u64(out, noise.cell_count());
    put_u64(out, noise.big_jumps.size());
    put_u64(out, noise.small_jumps.size());
    for (double d : noise.brownian_increments) put_f64(out, d);
    for (const auto& e : noise.big_jumps) {
        put_f64(out, e.time);
        put_f64(out, e.mark);
    }
    for (const auto& e : noise.small_jumps) {
        put_f64(out, e.time);
        put_f64(out, e.mark);
    }
    return out;
}

NoisePath deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    if (r.u64() != kMagic) throw InvalidArgument("not a noise blob");
    NoisePath p;
    p.seed = r.u64();
    p.horizon = r.f64();
    p.base_step = r.f64();
    p.grid_end = r.f64();
    p.cutoff_c = r.f64();
    p.truncation_eps = r.f64();
    const std::uint64_t cells = r.u64();
    const std::uint64_t nbig = r.u64();
    const std::uint64_t nsmall = r.u64();
    if ((cells + 2 * (nbig + nsmall)) * 8 + 80 != bytes.size()) {
        throw InvalidArgument("noise blob size mismatch");
    }
    p.brownian_increments.resize(cells);
    for (auto& d : p.brownian_increments) d = r.f64();
    p.big_jumps.resize(nbig);
    for (auto& e : p.big_jumps) {
        e.time = r.f64();
        e.mark = r.f64();
    }
    p.small_jumps.resize(nsmall);
    for (auto& e : p.small_jumps) {
        e.time = r.f64();
        e.mark = r.f64();
    }
    if (!r.done()) throw InvalidArgument("trailing bytes in noise blob");
    return p;
}

void write_csv(std::ostream& os, const NoisePath& noise) {
    char buf[96];
    os << "kind,time,value\n";
    for (std::size_t k = 0; k < noise.cell_count(); ++k) {
        std::snprintf(buf, sizeof buf, "bm,%.17g,%.17g\n", noise.cell_start(k), noise.cell_increment(k));
        os << buf;
    }
    for (const auto& e : noise.big_jumps) {
        std::snprintf(buf, sizeof buf, "big,%.17g,%.17g\n", e.time, e.mark);
        os << buf;
    }
    for (const auto& e : noise.small_jumps) {
        std::snprintf(buf, sizeof buf, "small,%.17g,%.17g\n", e.time, e.mark);
        os << buf;
    }
}

std::optional<NoiseCache> NoiseCache::from_environment() {
    const char* dir = std::getenv("JSDE_CACHE_DIR");
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    return NoiseCache(dir);
}

std::string NoiseCache::key_path(const LevyMeasure& m, double horizon, double base_step,
                                 double cutoff_c, double truncation_eps, std::uint64_t seed) const {
    std::string key = to_string(m.family()) + ":" + hex_float(m.alpha()) + ":" + hex_float(m.scale()) +
                      ":" + hex_float(m.tempering());
    for (const auto& a : m.atoms()) key += ":" + hex_float(a.position) + "/" + hex_float(a.mass);
    key += "|" + hex_float(horizon) + "|" + hex_float(base_step) + "|" + hex_float(cutoff_c) + "|" +
           hex_float(truncation_eps) + "|" + std::to_string(seed);
    char name[40];
    std::snprintf(name, sizeof name, "noise-%016llx.bin", static_cast<unsigned long long>(fnv1a(key)));
    return (std::filesystem::path(dir_) / name).string();
}

NoisePath NoiseCache::load_or_generate(const LevyMeasure& m, double horizon, double base_step,
                                       double cutoff_c, double truncation_eps,
                                       std::uint64_t seed) const {
    // Custom densities cannot be keyed.
    if (m.family() == LevyFamily::Custom) {
        return generate(m, horizon, base_step, cutoff_c, truncation_eps, seed);
    }
    const std::string path = key_path(m, horizon, base_step, cutoff_c, truncation_eps, seed);
    if (std::ifstream in{path, std::ios::binary}) {
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        try {
            NoisePath p = deserialize(bytes);
            if (p.seed == seed && p.horizon == horizon && p.base_step == base_step &&
                p.cutoff_c == cutoff_c && p.truncation_eps == truncation_eps) {
                return p;
            }
        } catch (const InvalidArgument&) {
            // stale or corrupt entry; regenerate below
        }
    }
    NoisePath p = generate(m, horizon, base_step, cutoff_c, truncation_eps, seed);
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto bytes = serialize(p);
    if (std::ofstream out{path, std::ios::binary | std::ios::trunc}) {
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    return p;
}

}  // namespace jsde
