#pragma once

// Control-cost accounting: the average size of the control perturbation per step.

#include "controls.hpp"
#include "core.hpp"

#include <vector>

namespace chaosctl {

struct CostWindow {
    std::size_t start = 0;
    std::size_t length = 0;
};

struct CostEstimate {
    double per_step = 0.0;   // P
    CostWindow window;
    NormKind norm_kind = NormKind::max;
};

/// Perturbation g(x) - f(x) applied by a post-map control at state x.
inline StateVector control_perturbation(const MapModel& f, const ControlConfig& cfg, const StateVector& x) {
    const StateVector fx = f(x);
    switch (cfg.scheme) {
    case Scheme::vmtoc: return cfg.intensity * (cfg.target - fx);
    case Scheme::diag_vmtoc: return (cfg.diagonal.array() * (cfg.target - fx).array()).matrix();
    default: throw Error("cost accounting supports VMTOC and DIAG-VMTOC only");
    }
}

/// Average of ||g(x_j) - f(x_j)|| over orbit[start, start + length). For VMTOC this is
/// c ||f(x_j) - T||; at a converged equilibrium x* it equals c ||f(x*) - T||.
inline CostEstimate cost_per_step(const MapModel& f, const ControlConfig& cfg, const std::vector<StateVector>& orbit,
                                  CostWindow window, NormKind kind = NormKind::max) {
    validate(cfg, f.domain());
    if (window.length == 0) throw Error("cost_per_step: empty window");
    if (window.start + window.length > orbit.size()) throw Error("cost_per_step: window exceeds orbit length");
    double sum = 0.0;
    for (std::size_t j = window.start; j < window.start + window.length; ++j)
        sum += norm(control_perturbation(f, cfg, orbit[j]), kind);
    return {sum / static_cast<double>(window.length), window, kind};
}

} // namespace chaosctl
