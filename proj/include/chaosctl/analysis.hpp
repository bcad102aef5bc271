#pragma once

// Equilibria, spectral radii and minimum-control-intensity estimates.
//
// Local bound: c* = max{0, 1 - 1/A}, A = min{B, C} with B and C the maximal absolute
// row and column sums of Jf over a compact set S. With T = K and f(K) = K, A may be
// replaced by rho(Jf(K)).
//
// Global bound: if ||f(x) - K|| <= L ||x - K|| on the domain, VMTOC with T = K
// converges for every c > c* = 1 - 1/L (c* = 0 for L <= 1). For a bounded, locally
// Lipschitz f, L = max{L~, M/||K|| + 1} with M = sup ||f||.
//
// All sup-type constants below are sampled estimates, never certified bounds.

#include "controls.hpp"
#include "core.hpp"
#include "sampling.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace chaosctl {

// ---------------------------------------------------------------------------
// Fixed points

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, StateVector best, double best_residual)
        : Error(what), best_(std::move(best)), best_residual_(best_residual) {}
    const StateVector& best_point() const { return best_; }
    double best_residual() const { return best_residual_; }

private:
    StateVector best_;
    double best_residual_;
};

struct FixedPointOptions {
    double tol = 1e-10;
    std::size_t max_iter = 500;
    int max_halvings = 30;
    std::size_t averaging_steps = 200;
};

struct FixedPointResult {
    StateVector x;
    double residual = 0.0;
    std::size_t iterations = 0;
};

inline double fixed_point_residual(const MapModel& f, const StateVector& x) {
    return norm(f(x) - x, NormKind::max);
}

/// Damped Newton on f(x) - x. When step halving cannot reduce the residual the solver
/// switches to Krasnosel'skii-Mann averaging x <- (x + f(x))/2 for a block of steps and
/// then resumes Newton. Iterates are projected onto the model domain.
inline FixedPointResult find_fixed_point(const MapModel& f, const StateVector& x0, const FixedPointOptions& opts = {}) {
    require_dimension(x0, f.dimension(), "initial guess");
    require_finite(x0);
    if (!(opts.tol > 0.0)) throw Error("fixed point tolerance must be positive");

    const auto& dom = f.domain();
    const auto d = static_cast<Eigen::Index>(f.dimension());
    auto residual_at = [&](const StateVector& x) {
        const StateVector fx = f(x);
        return fx.allFinite() ? norm(fx - x, NormKind::max) : std::numeric_limits<double>::infinity();
    };

    StateVector x = dom.project(x0);
    double r = residual_at(x);
    StateVector best = x;
    double best_r = r;
    std::size_t it = 0;

    while (it < opts.max_iter) {
        if (r < opts.tol) return {x, r, it};

        const Matrix jg = f.jacobian(x) - Matrix::Identity(d, d);
        const StateVector step = jg.colPivHouseholderQr().solve(-(f(x) - x));
        bool accepted = false;
        if (step.allFinite()) {
            double t = 1.0;
            for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
                StateVector y = dom.project(x + t * step);
                const double ry = residual_at(y);
                if (ry < r) {
                    x = std::move(y);
                    r = ry;
                    accepted = true;
                    break;
                }
            }
        }
        ++it;
        if (!accepted) {
            for (std::size_t k = 0; k < opts.averaging_steps && it < opts.max_iter; ++k, ++it) {
                const StateVector fx = f(x);
                if (!fx.allFinite()) break;
                x = dom.project(0.5 * (x + fx));
            }
            r = residual_at(x);
        }
        if (r < best_r) {
            best = x;
            best_r = r;
        }
    }
    if (r < opts.tol) return {x, r, it};
    throw ConvergenceError("fixed point solver did not converge (best residual " + std::to_string(best_r) + ")",
                           best, best_r);
}

/// Multistart search; results reached from several seeds are merged when closer than `dedup`.
inline std::vector<StateVector> find_equilibria(const MapModel& f, const std::vector<StateVector>& seeds,
                                                const FixedPointOptions& opts = {}, double dedup = 1e-6) {
    std::vector<StateVector> found;
    for (const auto& s : seeds) {
        try {
            auto res = find_fixed_point(f, s, opts);
            bool dup = false;
            for (const auto& e : found)
                if (norm(e - res.x, NormKind::max) < dedup) dup = true;
            if (!dup) found.push_back(std::move(res.x));
        } catch (const ConvergenceError&) {
        }
    }
    return found;
}

// ---------------------------------------------------------------------------
// Matrix bounds

inline double max_abs_row_sum(const Matrix& m) { return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }
inline double max_abs_col_sum(const Matrix& m) { return m.size() ? m.cwiseAbs().colwise().sum().maxCoeff() : 0.0; }

namespace detail {

/// rho(M) = lim ||M^k||^(1/k), evaluated at k = 2^j by normalized repeated squaring.
inline double spectral_radius_by_squaring(const Matrix& m) {
    double n = m.norm();
    if (n == 0.0) return 0.0;
    Matrix b = m / n;
    double log_scale = std::log(n);  // log ||M^k|| at k = 1
    double k = 1.0;
    double estimate = n;
    for (int j = 0; j < 60; ++j) {
        Matrix sq = b * b;
        const double ns = sq.norm();
        if (ns == 0.0) return 0.0;
        b = sq / ns;
        log_scale = 2.0 * log_scale + std::log(ns);
        k *= 2.0;
        const double next = std::exp(log_scale / k);
        if (j > 8 && std::abs(next - estimate) <= 1e-14 * std::max(1.0, next)) return next;
        estimate = next;
    }
    return estimate;
}

} // namespace detail

inline double spectral_radius(const Matrix& m) {
    if (m.rows() != m.cols()) throw Error("spectral_radius: matrix must be square");
    if (!m.allFinite()) throw Error("spectral_radius: non-finite matrix entries");
    if (m.size() == 0) return 0.0;
    if (m.rows() <= 50) {
        Eigen::EigenSolver<Matrix> es(m, false);
        if (es.info() != Eigen::Success) return detail::spectral_radius_by_squaring(m);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    return detail::spectral_radius_by_squaring(m);
}

struct BoundA {
    double row_bound = 0.0;   // B: max absolute row sum of Jf over S
    double col_bound = 0.0;   // C: max absolute column sum of Jf over S
    double value = 0.0;       // A = min{B, C}
    std::size_t n_points = 0;
};

inline BoundA bound_A(const MapModel& f, const SamplingBox& s, const SampleOptions& opts = {}) {
    require_dimension(s.lo, f.dimension(), "sampling box");
    const auto pts = sample_points(s, opts);
    if (pts.empty()) throw Error("bound_A: empty sample set");
    BoundA out;
    for (const auto& x : pts) {
        const Matrix j = f.jacobian(x);
        out.row_bound = std::max(out.row_bound, max_abs_row_sum(j));
        out.col_bound = std::max(out.col_bound, max_abs_col_sum(j));
    }
    out.value = std::min(out.row_bound, out.col_bound);
    out.n_points = pts.size();
    return out;
}

inline double local_cstar(double bound) {
    if (!(bound >= 0.0)) throw Error("local_cstar: bound must be nonnegative");
    return bound <= 1.0 ? 0.0 : 1.0 - 1.0 / bound;
}

inline double global_cstar(double lipschitz) {
    if (!(lipschitz >= 0.0)) throw Error("global_cstar: L must be nonnegative");
    return lipschitz <= 1.0 ? 0.0 : 1.0 - 1.0 / lipschitz;
}

// ---------------------------------------------------------------------------
// Lipschitz-type constant ||f(x) - K|| <= L ||x - K||

struct LipschitzEstimate {
    double value = 0.0;         // L = max{L~, M/||K|| + 1}
    double local_ratio = 0.0;   // L~ after the safety inflation
    double raw_ratio = 0.0;     // sampled max of ||f(x)-K|| / ||x-K|| on the ball ||x-K|| <= ||K||
    double sup_norm = 0.0;      // M, sampled sup of ||f(x)||
    double norm_k = 0.0;
    std::size_t n_points = 0;
    std::size_t n_ball_points = 0;
};

inline constexpr double kLipschitzSafety = 1.05;

inline LipschitzEstimate lipschitz_estimate(const MapModel& f, const StateVector& k, const SamplingBox& box,
                                            const SampleOptions& opts = {}, NormKind kind = NormKind::max) {
    require_dimension(k, f.dimension(), "fixed point K");
    require_dimension(box.lo, f.dimension(), "sampling box");
    if (fixed_point_residual(f, k) >= 1e-8) throw Error("lipschitz_estimate: K is not a fixed point of f");
    LipschitzEstimate out;
    out.norm_k = norm(k, kind);
    if (out.norm_k == 0.0) throw Error("lipschitz_estimate: ||K|| = 0");

    auto pts = sample_points(box, opts);
    // The ratio lives on the ball around K; the max-norm ball's bounding box covers it
    // for every supported norm, so sample that part of the box separately.
    const StateVector r = StateVector::Constant(k.size(), out.norm_k);
    if (auto ball = box.intersect({k - r, k + r})) {
        auto extra = sample_points(*ball, opts);
        pts.insert(pts.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
    }

    for (const auto& x : pts) {
        const StateVector fx = f(x);
        out.sup_norm = std::max(out.sup_norm, norm(fx, kind));
        const double dx = norm(x - k, kind);
        if (dx > 0.0 && dx <= out.norm_k) {
            out.raw_ratio = std::max(out.raw_ratio, norm(fx - k, kind) / dx);
            ++out.n_ball_points;
        }
    }
    out.n_points = pts.size();
    out.local_ratio = kLipschitzSafety * out.raw_ratio;
    out.value = std::max(out.local_ratio, out.sup_norm / out.norm_k + 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Contraction along a VMTOC orbit with T = K

struct ContractionCheck {
    bool holds = true;
    double theta = 0.0;            // (1-c)L
    double observed_ratio = 0.0;   // max ||x_{n+1}-K|| / ||x_n-K||
    std::size_t steps_checked = 0;
};

inline ContractionCheck verify_contraction(const MapModel& f, const ControlConfig& cfg, const StateVector& k,
                                           double lipschitz, const StateVector& x0, std::size_t n,
                                           NormKind kind = NormKind::max) {
    if (cfg.scheme != Scheme::vmtoc) throw Error("verify_contraction: VMTOC configuration required");
    validate(cfg, f.domain());
    require_dimension(k, f.dimension(), "fixed point K");
    if (norm(cfg.target - k, NormKind::max) > 1e-12 * (1.0 + norm(k, NormKind::max)))
        throw Error("verify_contraction: target must equal K");
    if (fixed_point_residual(f, k) >= 1e-8) throw Error("verify_contraction: K is not a fixed point of f");
    if (!(cfg.intensity > global_cstar(lipschitz)))
        throw Error("verify_contraction: intensity does not exceed the global threshold 1 - 1/L");

    ContractionCheck out;
    out.theta = (1.0 - cfg.intensity) * lipschitz;
    const MapModel g = controlled_map(f, cfg);
    StateVector x = x0;
    for (std::size_t i = 0; i < n; ++i) {
        const StateVector next = g(x);
        const double before = norm(x - k, kind);
        if (before >= 1e-12) {
            const double ratio = norm(next - k, kind) / before;
            out.observed_ratio = std::max(out.observed_ratio, ratio);
            // 1e-12 absorbs rounding in the ratio itself
            if (ratio > out.theta + 1e-12) out.holds = false;
            ++out.steps_checked;
        }
        x = next;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stability report

struct StabilityReport {
    StateVector equilibrium;
    double residual = 0.0;
    double rho = 0.0;
    BoundA bound;
    LipschitzEstimate lipschitz;
    double local_cstar_rho = 0.0;
    double local_cstar_A = 0.0;
    double global_cstar = 0.0;
    bool equilibrium_in_S = true;
    SamplingBox set_s;
    SamplingBox lipschitz_box;
    NormKind norm_kind = NormKind::max;
};

struct StabilityOptions {
    std::optional<SamplingBox> set_s;          // defaults to {K}
    std::optional<SamplingBox> lipschitz_box;  // defaults to the ball box [K - ||K||, K + ||K||] clamped to the domain
    SampleOptions sampling{};
    FixedPointOptions solver{};
    NormKind norm_kind = NormKind::max;
};

/// Locates the equilibrium of f reached from `x0` and evaluates every threshold estimate there.
inline StabilityReport stability_report(const MapModel& f, const StateVector& x0, const StabilityOptions& opts = {}) {
    StabilityReport rep;
    const auto fp = find_fixed_point(f, x0, opts.solver);
    rep.equilibrium = fp.x;
    rep.residual = fp.residual;
    rep.norm_kind = opts.norm_kind;
    rep.rho = spectral_radius(f.jacobian(fp.x));
    rep.set_s = opts.set_s.value_or(SamplingBox::point(fp.x));
    rep.equilibrium_in_S = rep.set_s.contains(fp.x);
    rep.bound = bound_A(f, rep.set_s, opts.sampling);
    if (opts.lipschitz_box) {
        rep.lipschitz_box = *opts.lipschitz_box;
    } else {
        const StateVector r = StateVector::Constant(fp.x.size(), norm(fp.x, opts.norm_kind));
        rep.lipschitz_box = {f.domain().project(fp.x - r), f.domain().project(fp.x + r)};
    }
    rep.lipschitz = lipschitz_estimate(f, fp.x, rep.lipschitz_box, opts.sampling, opts.norm_kind);
    rep.local_cstar_rho = local_cstar(rep.rho);
    rep.local_cstar_A = local_cstar(rep.bound.value);
    rep.global_cstar = chaosctl::global_cstar(rep.lipschitz.value);
    return rep;
}

} // namespace chaosctl
