#pragma once

// Benchmark maps: the larvae-pupae-adults (LPA) flour beetle model and the
// delayed Ricker equation written as a first-order system.

#include "core.hpp"

#include <cmath>
#include <string>

namespace chaosctl {

/// LPA parameters; defaults are the chaotic regime studied for VMTOC.
struct LpaParams {
    double b = 10.45;       // larval recruits per adult per unit time
    double c_el = 0.01731;  // egg cannibalism by larvae
    double c_ea = 0.01310;  // egg cannibalism by adults
    double c_pa = 0.35;     // pupal cannibalism by adults
    double mu_l = 0.200;    // larval mortality
    double mu_a = 0.96;     // adult mortality

    void validate() const {
        if (!(b > 0.0)) throw Error("lpa.b must be > 0");
        if (!(c_el >= 0.0) || !(c_ea >= 0.0) || !(c_pa >= 0.0)) throw Error("lpa cannibalism coefficients must be >= 0");
        if (!(mu_l > 0.0 && mu_l < 1.0)) throw Error("lpa.mu_l must lie in (0,1)");
        if (!(mu_a > 0.0 && mu_a < 1.0)) throw Error("lpa.mu_a must lie in (0,1)");
    }

    /// sup of the larval recruitment term, attained at A = 1/c_ea: e^-1 b / c_ea.
    double recruitment_bound() const { return b / (c_ea * std::exp(1.0)); }

    bool operator==(const LpaParams&) const = default;
};

inline StateVector lpa_eval(const LpaParams& p, const StateVector& x, bool strict = false) {
    require_dimension(x, 3);
    if (strict && (x.array() < 0.0).any()) throw Error("lpa: negative population component");
    const double l = x[0], pu = x[1], a = x[2];
    StateVector out(3);
    out[0] = p.b * a * std::exp(-p.c_el * l - p.c_ea * a);
    out[1] = (1.0 - p.mu_l) * l;
    out[2] = pu * std::exp(-p.c_pa * a) + a * (1.0 - p.mu_a);
    return out;
}

inline Matrix lpa_jacobian(const LpaParams& p, const StateVector& x) {
    require_dimension(x, 3);
    const double l = x[0], pu = x[1], a = x[2];
    const double e = std::exp(-p.c_ea * a - p.c_el * l);
    const double epa = std::exp(-p.c_pa * a);
    Matrix j = Matrix::Zero(3, 3);
    j(0, 0) = -p.b * p.c_el * a * e;
    j(0, 2) = p.b * (1.0 - p.c_ea * a) * e;
    j(1, 0) = 1.0 - p.mu_l;
    j(2, 1) = epa;
    j(2, 2) = 1.0 - p.mu_a - p.c_pa * pu * epa;
    return j;
}

inline MapModel lpa_model(const LpaParams& p = {}, bool strict = false) {
    p.validate();
    return MapModel(
        "lpa", DomainSpec::orthant(3),
        [p, strict](const StateVector& x) { return lpa_eval(p, x, strict); },
        [p](const StateVector& x) { return lpa_jacobian(p, x); });
}

/// u_{n+1} = u_n exp(r - u_{n-d+1})
struct RickerParams {
    double r = 2.0;
    int delay = 2;

    void validate() const {
        if (delay < 2) throw Error("ricker.d must be >= 2");
        if (!std::isfinite(r)) throw Error("ricker.r must be finite");
    }

    bool operator==(const RickerParams&) const = default;
};

/// Lift to x = (u_n, u_{n-1}, ..., u_{n-d+1}): f(x) = (x_1 exp(r - x_d), x_1, ..., x_{d-1}).
inline MapModel ricker_lift(const RickerParams& p) {
    p.validate();
    const auto d = static_cast<Eigen::Index>(p.delay);
    auto eval = [r = p.r, d](const StateVector& x) {
        StateVector out(d);
        out[0] = x[0] * std::exp(r - x[d - 1]);
        out.tail(d - 1) = x.head(d - 1);
        return out;
    };
    auto jac = [r = p.r, d](const StateVector& x) {
        Matrix j = Matrix::Zero(d, d);
        const double e = std::exp(r - x[d - 1]);
        j(0, 0) = e;
        j(0, d - 1) += -x[0] * e;
        for (Eigen::Index i = 1; i < d; ++i) j(i, i - 1) = 1.0;
        return j;
    };
    return MapModel("ricker", DomainSpec::orthant(static_cast<std::size_t>(d)), std::move(eval), std::move(jac));
}

} // namespace chaosctl
