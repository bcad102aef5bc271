#pragma once

// Orbits, period classification, bifurcation scans over control intensity,
// bubble detection and the largest Lyapunov exponent.

#include "controls.hpp"
#include "core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace chaosctl {

class NonFiniteState : public Error {
public:
    NonFiniteState(std::size_t step) : Error("non-finite state at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

struct OrbitOptions {
    bool strict = false;  // domain violations throw instead of being reported
    std::function<void(std::size_t step, const StateVector& x)> on_domain_violation;
};

/// Iterates g n_transient + n_keep times from x0 and returns the last n_keep states.
inline std::vector<StateVector> iterate_orbit(const MapModel& g, const StateVector& x0, std::size_t n_transient,
                                              std::size_t n_keep, const OrbitOptions& opts = {}) {
    require_dimension(x0, g.dimension(), "initial condition");
    if (!is_finite(x0)) throw NonFiniteState(0);
    if (!g.domain().contains(x0)) {
        if (opts.strict) throw Error("initial condition lies outside the model domain");
        if (opts.on_domain_violation) opts.on_domain_violation(0, x0);
    }
    std::vector<StateVector> kept;
    kept.reserve(n_keep);
    StateVector x = x0;
    const std::size_t total = n_transient + n_keep;
    for (std::size_t step = 1; step <= total; ++step) {
        x = g(x);
        if (!is_finite(x)) throw NonFiniteState(step);
        if (!g.domain().contains(x)) {
            if (opts.strict) throw Error("state left the model domain at step " + std::to_string(step));
            if (opts.on_domain_violation) opts.on_domain_violation(step, x);
        }
        if (step > n_transient) kept.push_back(x);
    }
    return kept;
}

inline std::vector<StateVector> iterate_orbit(const MapModel& f, const std::optional<ControlConfig>& cfg,
                                              const StateVector& x0, std::size_t n_transient, std::size_t n_keep,
                                              const OrbitOptions& opts = {}) {
    return iterate_orbit(controlled_map(f, cfg), x0, n_transient, n_keep, opts);
}

// ---------------------------------------------------------------------------
// Periods

/// Period of one component; nullopt means aperiodic up to the tested maximum.
using Period = std::optional<std::size_t>;

inline std::string to_string(const Period& p) { return p ? std::to_string(*p) : std::string("aperiodic"); }

/// Smallest p <= max_period with |v[i+p] - v[i]| < tol (1 + |v[i]|) for every i.
inline Period detect_period(const std::vector<double>& v, double tol, std::size_t max_period) {
    if (!(tol > 0.0)) throw Error("detect_period: tolerance must be positive");
    if (max_period == 0) throw Error("detect_period: max_period must be >= 1");
    if (v.size() < 2 * max_period) throw Error("detect_period: orbit too short for max_period");
    for (std::size_t p = 1; p <= max_period; ++p) {
        bool fits = true;
        for (std::size_t i = 0; i + p < v.size() && fits; ++i)
            fits = std::abs(v[i + p] - v[i]) < tol * (1.0 + std::abs(v[i]));
        if (fits) return p;
    }
    return std::nullopt;
}

inline std::vector<double> component_series(const std::vector<StateVector>& orbit, std::size_t j) {
    std::vector<double> v;
    v.reserve(orbit.size());
    for (const auto& x : orbit) v.push_back(x[static_cast<Eigen::Index>(j)]);
    return v;
}

inline std::vector<Period> detect_period(const std::vector<StateVector>& orbit, double tol, std::size_t max_period) {
    if (orbit.empty()) throw Error("detect_period: orbit too short for max_period");
    const auto d = static_cast<std::size_t>(orbit.front().size());
    std::vector<Period> out;
    out.reserve(d);
    for (std::size_t j = 0; j < d; ++j) out.push_back(detect_period(component_series(orbit, j), tol, max_period));
    return out;
}

/// Least common multiple of the component periods; nullopt if any is aperiodic.
inline Period overall_period(const std::vector<Period>& per_component) {
    std::size_t l = 1;
    for (const auto& p : per_component) {
        if (!p) return std::nullopt;
        l = std::lcm(l, *p);
    }
    return l;
}

/// Scalar series carried by a delay-coordinate orbit x_n = (u_n, u_{n-1}, ..., u_{n-d+1}).
/// Every d-th state contributes its window oldest-first, so consecutive windows tile the
/// series. For the uncontrolled lift this reproduces u exactly; a stabilized state with
/// unequal components reads as a d-periodic population sequence.
inline std::vector<double> delay_series(const std::vector<StateVector>& orbit) {
    std::vector<double> u;
    if (orbit.empty()) return u;
    const auto d = orbit.front().size();
    for (std::size_t n = 0; n < orbit.size(); n += static_cast<std::size_t>(d))
        for (Eigen::Index i = d - 1; i >= 0; --i) u.push_back(orbit[n][i]);
    return u;
}

// ---------------------------------------------------------------------------
// Bifurcation scans

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-grid-point stream seed derived from (master seed, grid index).
inline std::uint64_t stream_seed(std::uint64_t master, std::size_t index) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

/// Uniform draw in [lo, hi] from a 64-bit engine; platform independent, unlike
/// std::uniform_real_distribution.
inline StateVector uniform_in_box(std::mt19937_64& rng, const StateVector& lo, const StateVector& hi) {
    StateVector x(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        x[i] = lo[i] + u * (hi[i] - lo[i]);
    }
    return x;
}

struct SeedPolicy {
    std::uint64_t master_seed = 1;
    StateVector box_lo;   // initial conditions drawn uniformly from [box_lo, box_hi]
    StateVector box_hi;
    bool continuation = false;  // reuse the last state of the previous grid value
};

struct ScanOptions {
    std::size_t n_transient = 3000;
    std::size_t n_keep = 50;
    double period_tol = 1e-5;
    std::size_t max_period = 32;
    unsigned threads = 0;  // 0: CHAOSCTL_THREADS or hardware concurrency
};

struct ScanRecord {
    double c = 0.0;
    std::vector<StateVector> points;
    std::vector<Period> periods;
    std::uint64_t seed = 0;
    std::optional<std::string> error;

    bool stable(std::size_t component) const {
        return !error && component < periods.size() && periods[component] == Period{1};
    }
    bool all_stable() const {
        if (error || periods.empty()) return false;
        return std::all_of(periods.begin(), periods.end(), [](const Period& p) { return p == Period{1}; });
    }
};

/// `k/N` grid: c = k/N for k = 0..N-1.
inline std::vector<double> fraction_grid(std::size_t n) {
    std::vector<double> g;
    g.reserve(n);
    for (std::size_t k = 0; k < n; ++k) g.push_back(static_cast<double>(k) / static_cast<double>(n));
    return g;
}

inline unsigned scan_threads(unsigned requested) {
    if (requested > 0) return requested;
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CHAOSCTL_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap > 0) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

namespace detail {

inline ScanRecord scan_one(const MapModel& f, const ControlConfig& control, double c, const StateVector& x0,
                           std::uint64_t seed, const ScanOptions& opts, std::size_t max_period) {
    ScanRecord rec;
    rec.c = c;
    rec.seed = seed;
    try {
        const MapModel g = controlled_map(f, control.with_intensity(c));
        rec.points = iterate_orbit(g, x0, opts.n_transient, opts.n_keep);
        rec.periods = detect_period(rec.points, opts.period_tol, max_period);
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.periods.assign(f.dimension(), std::nullopt);
    }
    return rec;
}

} // namespace detail

/// One ScanRecord per grid value, in grid order. Per-value failures are stored in the record.
/// The period search is capped at n_keep / 2 so short retained windows stay classifiable.
inline std::vector<ScanRecord> bifurcation_scan(const MapModel& f, const ControlConfig& control,
                                                const std::vector<double>& c_grid, const SeedPolicy& seeds,
                                                const ScanOptions& opts = {}) {
    const auto d = f.dimension();
    require_dimension(seeds.box_lo, d, "seed box");
    require_dimension(seeds.box_hi, d, "seed box");
    for (double c : c_grid) check_intensity(c);
    if (opts.n_keep < 2) throw Error("bifurcation_scan: n_keep must be >= 2");
    const std::size_t max_period = std::min(opts.max_period, opts.n_keep / 2);

    std::vector<ScanRecord> out(c_grid.size());
    if (seeds.continuation) {
        std::mt19937_64 rng(seeds.master_seed);
        StateVector x = uniform_in_box(rng, seeds.box_lo, seeds.box_hi);
        for (std::size_t i = 0; i < c_grid.size(); ++i) {
            out[i] = detail::scan_one(f, control, c_grid[i], x, seeds.master_seed, opts, max_period);
            if (!out[i].error && !out[i].points.empty())
                x = out[i].points.back();
            else
                x = uniform_in_box(rng, seeds.box_lo, seeds.box_hi);
        }
        return out;
    }

    auto task = [&](std::size_t i) {
        const std::uint64_t seed = stream_seed(seeds.master_seed, i);
        std::mt19937_64 rng(seed);
        const StateVector x0 = uniform_in_box(rng, seeds.box_lo, seeds.box_hi);
        out[i] = detail::scan_one(f, control, c_grid[i], x0, seed, opts, max_period);
    };
    const unsigned n_threads = std::min<unsigned>(scan_threads(opts.threads), static_cast<unsigned>(c_grid.size()));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < c_grid.size(); ++i) task(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < c_grid.size(); i = next++) task(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

struct Bubble {
    std::size_t component = 0;
    double c_lo = 0.0;
    double c_hi = 0.0;

    bool operator==(const Bubble&) const = default;
};

/// Maximal runs of non-period-1 grid values in one component that have a period-1 value
/// on both sides. Endpoints are the first and last unstable grid values of each run.
inline std::vector<Bubble> detect_bubbles(const std::vector<ScanRecord>& scan) {
    std::vector<Bubble> out;
    if (scan.empty()) return out;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (scan[i].c < scan[i - 1].c) throw Error("detect_bubbles: scan must be sorted by c");
    const std::size_t d = scan.front().periods.size();
    for (std::size_t j = 0; j < d; ++j) {
        bool seen_stable = false;
        std::optional<std::size_t> run_start;
        for (std::size_t i = 0; i < scan.size(); ++i) {
            if (scan[i].stable(j)) {
                if (run_start && seen_stable) out.push_back({j, scan[*run_start].c, scan[i - 1].c});
                run_start.reset();
                seen_stable = true;
            } else if (!run_start) {
                run_start = i;
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const Bubble& a, const Bubble& b) { return a.component < b.component; });
    return out;
}

/// Index of the first record from which every later record is period 1 in all components.
inline std::optional<std::size_t> settled_index(const std::vector<ScanRecord>& scan) {
    std::optional<std::size_t> idx;
    for (std::size_t i = scan.size(); i-- > 0;) {
        if (!scan[i].all_stable()) break;
        idx = i;
    }
    return idx;
}

// ---------------------------------------------------------------------------
// Lyapunov exponent

/// Largest Lyapunov exponent from the growth of a renormalized tangent vector, averaged
/// over the last 80% of the n steps.
inline double lyapunov_max(const MapModel& g, const StateVector& x0, std::size_t n) {
    require_dimension(x0, g.dimension(), "initial condition");
    if (n < 1000) throw Error("lyapunov_max: at least 1000 steps required");
    const auto d = static_cast<Eigen::Index>(g.dimension());
    StateVector x = x0;
    StateVector v = StateVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    const std::size_t skip = n / 5;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v = g.jacobian(x) * v;
        x = g(x);
        if (!is_finite(x)) throw Error("lyapunov_max: orbit diverged at step " + std::to_string(i + 1));
        const double growth = v.norm();
        if (growth == 0.0) return -std::numeric_limits<double>::infinity();
        if (!std::isfinite(growth)) throw Error("lyapunov_max: tangent vector diverged at step " + std::to_string(i + 1));
        if (i >= skip) sum += std::log(growth);
        v /= growth;
    }
    return sum / static_cast<double>(n - skip);
}

inline double lyapunov_max(const MapModel& f, const std::optional<ControlConfig>& cfg, const StateVector& x0,
                           std::size_t n) {
    return lyapunov_max(controlled_map(f, cfg), x0, n);
}

} // namespace chaosctl
