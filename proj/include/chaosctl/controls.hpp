#pragma once

// Target-oriented control laws and the constructive identities between them.
//
//   VTOC       x' = f(cT + (1-c)x)
//   VMTOC      x' = cT + (1-c)f(x)
//   PF         x' = f((1-c)x)
//   MPF        x' = (1-c)f(x)
//   DIAG-VMTOC x' = CT + (I-C)f(x),  C = diag(c_1..c_d)

#include "core.hpp"

#include <optional>
#include <string>

namespace chaosctl {

enum class Scheme { vtoc, vmtoc, pf, mpf, diag_vmtoc };

inline std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::vtoc: return "vtoc";
    case Scheme::vmtoc: return "vmtoc";
    case Scheme::pf: return "pf";
    case Scheme::mpf: return "mpf";
    case Scheme::diag_vmtoc: return "diag";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "vtoc") return Scheme::vtoc;
    if (s == "vmtoc") return Scheme::vmtoc;
    if (s == "pf") return Scheme::pf;
    if (s == "mpf") return Scheme::mpf;
    if (s == "diag" || s == "diag-vmtoc" || s == "diag_vmtoc") return Scheme::diag_vmtoc;
    throw Error("unknown control scheme '" + s + "'");
}

inline bool uses_target(Scheme s) { return s != Scheme::pf && s != Scheme::mpf; }

struct ControlConfig {
    Scheme scheme = Scheme::vmtoc;
    double intensity = 0.0;        // scalar schemes
    StateVector diagonal;          // DIAG-VMTOC only
    StateVector target;            // ignored by PF/MPF

    static ControlConfig vmtoc(double c, StateVector t) { return {Scheme::vmtoc, c, {}, std::move(t)}; }
    static ControlConfig vtoc(double c, StateVector t) { return {Scheme::vtoc, c, {}, std::move(t)}; }
    static ControlConfig pf(double c) { return {Scheme::pf, c, {}, {}}; }
    static ControlConfig mpf(double c) { return {Scheme::mpf, c, {}, {}}; }
    static ControlConfig diag(StateVector cs, StateVector t) { return {Scheme::diag_vmtoc, 0.0, std::move(cs), std::move(t)}; }

    /// Same scheme and target with a different scalar intensity (DIAG: c broadcast to every stage).
    ControlConfig with_intensity(double c) const {
        ControlConfig out = *this;
        if (scheme == Scheme::diag_vmtoc)
            out.diagonal = StateVector::Constant(target.size(), c);
        else
            out.intensity = c;
        return out;
    }

    bool operator==(const ControlConfig& o) const {
        return scheme == o.scheme && intensity == o.intensity && same_state(diagonal, o.diagonal) &&
               same_state(target, o.target);
    }
};

inline void check_intensity(double c) {
    if (!(c >= 0.0 && c < 1.0)) throw Error("control intensity must lie in [0,1), got " + std::to_string(c));
}

/// Throws when the configuration is not usable with a map on `domain`.
inline void validate(const ControlConfig& cfg, const DomainSpec& domain) {
    const auto d = domain.dimension();
    if (cfg.scheme == Scheme::diag_vmtoc) {
        require_dimension(cfg.diagonal, d, "control diagonal");
        for (Eigen::Index i = 0; i < cfg.diagonal.size(); ++i) check_intensity(cfg.diagonal[i]);
    } else {
        check_intensity(cfg.intensity);
    }
    if (uses_target(cfg.scheme)) {
        require_dimension(cfg.target, d, "control target");
        if (!domain.contains(cfg.target)) throw Error("control target lies outside the model domain");
    }
}

namespace detail {

inline StateVector pre_map_transform(const ControlConfig& cfg, const StateVector& x) {
    switch (cfg.scheme) {
    case Scheme::vtoc: return cfg.intensity * cfg.target + (1.0 - cfg.intensity) * x;
    case Scheme::pf: return (1.0 - cfg.intensity) * x;
    default: return x;
    }
}

inline StateVector post_map_transform(const ControlConfig& cfg, const StateVector& fx) {
    switch (cfg.scheme) {
    case Scheme::vmtoc: return cfg.intensity * cfg.target + (1.0 - cfg.intensity) * fx;
    case Scheme::mpf: return (1.0 - cfg.intensity) * fx;
    case Scheme::diag_vmtoc:
        return (cfg.diagonal.array() * cfg.target.array() + (1.0 - cfg.diagonal.array()) * fx.array()).matrix();
    default: return fx;
    }
}

} // namespace detail

inline StateVector apply_control(const MapModel& f, const ControlConfig& cfg, const StateVector& x) {
    validate(cfg, f.domain());
    require_dimension(x, f.dimension());
    return detail::post_map_transform(cfg, f(detail::pre_map_transform(cfg, x)));
}

/// The controlled map g as a MapModel. Its Jacobian follows the chain rule when f has an
/// analytic Jacobian and falls back to finite differences otherwise.
inline MapModel controlled_map(const MapModel& f, const ControlConfig& cfg) {
    validate(cfg, f.domain());
    auto eval = [f, cfg](const StateVector& x) {
        return detail::post_map_transform(cfg, f(detail::pre_map_transform(cfg, x)));
    };
    MapModel::Jacobian jac;
    if (f.has_analytic_jacobian()) {
        jac = [f, cfg](const StateVector& x) -> Matrix {
            const Matrix jf = f.jacobian(detail::pre_map_transform(cfg, x));
            if (cfg.scheme == Scheme::diag_vmtoc)
                return (1.0 - cfg.diagonal.array()).matrix().asDiagonal() * jf;
            return (1.0 - cfg.intensity) * jf;
        };
    }
    return MapModel(f.name() + "+" + to_string(cfg.scheme), f.domain(), std::move(eval), std::move(jac));
}

/// Controlled map when a control is present, the bare model otherwise.
inline MapModel controlled_map(const MapModel& f, const std::optional<ControlConfig>& cfg) {
    return cfg ? controlled_map(f, *cfg) : f;
}

/// A scalar-intensity VMTOC pair (c, T).
struct VmtocPair {
    double intensity = 0.0;
    StateVector target;
    bool identity = false;   // set when the pair is the uncontrolled map
};

/// Single VMTOC equivalent to applying `first` and then `second` after each map step.
inline VmtocPair compose_vmtoc(const VmtocPair& first, const VmtocPair& second) {
    check_intensity(first.intensity);
    check_intensity(second.intensity);
    const double c1 = first.intensity, c2 = second.intensity;
    if (c1 == 0.0 && c2 == 0.0)
        return {0.0, second.target.size() ? second.target : first.target, true};
    if (c2 == 0.0) return {c1, first.target, false};
    if (c1 == 0.0) return {c2, second.target, false};
    if (first.target.size() != second.target.size()) throw Error("compose_vmtoc: target dimension mismatch");
    const double c = c1 * (1.0 - c2) + c2;
    const double w1 = c1 * (1.0 - c2) / c;
    return {c, w1 * first.target + (c2 / c) * second.target, false};
}

/// Pair (c_K, T_K) for which K becomes an equilibrium of cT + (1-c)f(x).
/// T_K lies on the ray from f(K) through K at parameter alpha > 1, and c_K = 1/alpha.
inline VmtocPair target_for_state(const MapModel& f, const StateVector& k, double alpha) {
    require_dimension(k, f.dimension(), "state K");
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw Error("alpha must be a finite real > 1");
    if (!f.domain().contains(k)) throw Error("state K lies outside the model domain");
    if (!f.domain().interior(k)) throw Error("state K lies on the domain boundary");
    const StateVector fk = f(k);
    StateVector tk = alpha * k + (1.0 - alpha) * fk;
    if (!f.domain().contains(tk)) throw Error("alpha too large for domain");
    return {1.0 / alpha, std::move(tk), false};
}

/// phi(x) = cT + (1-c)x, the conjugacy between VTOC and VMTOC.
inline StateVector conjugate_state(const ControlConfig& cfg, const StateVector& x) {
    if (cfg.scheme != Scheme::vtoc && cfg.scheme != Scheme::vmtoc)
        throw Error("conjugate_state needs a VTOC or VMTOC configuration");
    check_intensity(cfg.intensity);
    require_dimension(x, static_cast<std::size_t>(cfg.target.size()));
    return cfg.intensity * cfg.target + (1.0 - cfg.intensity) * x;
}

} // namespace chaosctl
