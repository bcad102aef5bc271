#pragma once

// Deterministic point sets over compact boxes: a tensor grid plus a Halton
// prefix. Halton prefixes are nested, so enlarging n_halton only adds points.

#include "core.hpp"

#include <array>
#include <vector>

namespace chaosctl {

struct SamplingBox {
    StateVector lo;
    StateVector hi;

    static SamplingBox point(const StateVector& x) { return {x, x}; }

    std::size_t dimension() const { return static_cast<std::size_t>(lo.size()); }

    void validate() const {
        if (lo.size() != hi.size() || lo.size() == 0) throw Error("sampling box: bad dimensions");
        if (!is_finite(lo) || !is_finite(hi)) throw Error("sampling box: bounds must be finite");
        if ((lo.array() > hi.array()).any()) throw Error("sampling box: lo must be <= hi componentwise");
    }

    bool contains(const StateVector& x) const {
        return x.size() == lo.size() && (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
    }

    /// Intersection with another box; empty optional when disjoint.
    std::optional<SamplingBox> intersect(const SamplingBox& other) const {
        SamplingBox out{lo.cwiseMax(other.lo), hi.cwiseMin(other.hi)};
        if ((out.lo.array() > out.hi.array()).any()) return std::nullopt;
        return out;
    }
};

struct SampleOptions {
    std::size_t grid_per_axis = 20;
    std::size_t n_halton = 0;
};

/// Radical inverse of `index` in base `base`.
inline double radical_inverse(std::size_t index, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

inline unsigned nth_prime(std::size_t n) {
    static constexpr std::array<unsigned, 32> primes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29,  31,  37,  41,  43,  47,  53,
                                                     59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
    if (n >= primes.size()) throw Error("halton sampling supports at most 32 dimensions");
    return primes[n];
}

inline std::vector<StateVector> sample_points(const SamplingBox& box, const SampleOptions& opts) {
    box.validate();
    const auto d = static_cast<Eigen::Index>(box.dimension());
    std::vector<StateVector> pts;

    const std::size_t g = opts.grid_per_axis;
    if (g > 0) {
        std::size_t total = 1;
        for (Eigen::Index i = 0; i < d; ++i) total *= g;
        pts.reserve(total + opts.n_halton);
        for (std::size_t flat = 0; flat < total; ++flat) {
            StateVector x(d);
            std::size_t rem = flat;
            for (Eigen::Index i = 0; i < d; ++i) {
                const std::size_t k = rem % g;
                rem /= g;
                const double t = g == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(g - 1);
                x[i] = box.lo[i] + t * (box.hi[i] - box.lo[i]);
            }
            pts.push_back(std::move(x));
        }
    }
    for (std::size_t n = 1; n <= opts.n_halton; ++n) {
        StateVector x(d);
        for (Eigen::Index i = 0; i < d; ++i)
            x[i] = box.lo[i] + radical_inverse(n, nth_prime(static_cast<std::size_t>(i))) * (box.hi[i] - box.lo[i]);
        pts.push_back(std::move(x));
    }
    return pts;
}

} // namespace chaosctl
