#pragma once

// State-space primitives shared by every other header: state vectors, norms,
// convex domains and the map abstraction.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace chaosctl {

using StateVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool is_finite(const StateVector& x) { return x.allFinite(); }

/// Exact equality that tolerates differing sizes (Eigen's operator== asserts on them).
inline bool same_state(const StateVector& a, const StateVector& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
}

inline void require_finite(const StateVector& x) {
    if (!is_finite(x)) throw Error("non-finite state");
}

inline void require_dimension(const StateVector& x, std::size_t d, const char* what = "state") {
    if (static_cast<std::size_t>(x.size()) != d)
        throw Error(std::string(what) + ": dimension mismatch (expected " + std::to_string(d) +
                    ", got " + std::to_string(x.size()) + ")");
}

enum class NormKind { max, euclidean, sum };

inline double norm(const StateVector& x, NormKind kind = NormKind::max) {
    require_finite(x);
    switch (kind) {
    case NormKind::max: return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
    case NormKind::euclidean: return x.norm();
    case NormKind::sum: return x.cwiseAbs().sum();
    }
    throw Error("unknown norm kind");
}

inline std::string to_string(NormKind kind) {
    switch (kind) {
    case NormKind::max: return "max";
    case NormKind::euclidean: return "euclidean";
    case NormKind::sum: return "sum";
    }
    return "?";
}

inline NormKind parse_norm_kind(const std::string& s) {
    if (s == "max") return NormKind::max;
    if (s == "euclidean") return NormKind::euclidean;
    if (s == "sum") return NormKind::sum;
    throw Error("unknown norm kind '" + s + "'");
}

/// Closed convex domain: the nonnegative orthant, an axis-aligned box, or all of R^d.
class DomainSpec {
public:
    enum class Kind { nonnegative_orthant, box, full_space };

    static DomainSpec orthant(std::size_t d) { return DomainSpec(Kind::nonnegative_orthant, d, {}, {}); }
    static DomainSpec full(std::size_t d) { return DomainSpec(Kind::full_space, d, {}, {}); }
    static DomainSpec box(StateVector lo, StateVector hi) {
        if (lo.size() != hi.size()) throw Error("box bounds: dimension mismatch");
        if (!is_finite(lo) || !is_finite(hi)) throw Error("box bounds must be finite");
        if ((lo.array() > hi.array()).any()) throw Error("box bounds: lo must be <= hi componentwise");
        auto d = static_cast<std::size_t>(lo.size());
        return DomainSpec(Kind::box, d, std::move(lo), std::move(hi));
    }

    Kind kind() const { return kind_; }
    std::size_t dimension() const { return dim_; }
    const StateVector& lo() const { return lo_; }
    const StateVector& hi() const { return hi_; }

    bool contains(const StateVector& x) const {
        require_dimension(x, dim_);
        switch (kind_) {
        case Kind::full_space: return is_finite(x);
        case Kind::nonnegative_orthant: return is_finite(x) && (x.array() >= 0.0).all();
        case Kind::box: return is_finite(x) && (x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all();
        }
        return false;
    }

    /// True when x lies in the domain but not on its boundary.
    bool interior(const StateVector& x) const {
        require_dimension(x, dim_);
        switch (kind_) {
        case Kind::full_space: return is_finite(x);
        case Kind::nonnegative_orthant: return is_finite(x) && (x.array() > 0.0).all();
        case Kind::box: return is_finite(x) && (x.array() > lo_.array()).all() && (x.array() < hi_.array()).all();
        }
        return false;
    }

    /// Nearest point of the domain in every norm considered here (componentwise clamp).
    StateVector project(const StateVector& x) const {
        require_dimension(x, dim_);
        switch (kind_) {
        case Kind::full_space: return x;
        case Kind::nonnegative_orthant: return x.cwiseMax(0.0);
        case Kind::box: return x.cwiseMax(lo_).cwiseMin(hi_);
        }
        return x;
    }

private:
    DomainSpec(Kind k, std::size_t d, StateVector lo, StateVector hi)
        : kind_(k), dim_(d), lo_(std::move(lo)), hi_(std::move(hi)) {
        if (d == 0) throw Error("domain dimension must be positive");
    }

    Kind kind_;
    std::size_t dim_;
    StateVector lo_, hi_;
};

inline bool contains(const DomainSpec& domain, const StateVector& x) { return domain.contains(x); }

/// Central finite-difference Jacobian with step 1e-6 * (1 + |x_i|).
template <class F>
Matrix finite_difference_jacobian(const F& f, const StateVector& x) {
    const auto d = x.size();
    Matrix jac(d, d);
    StateVector xp = x, xm = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        jac.col(i) = (f(xp) - f(xm)) / (xp[i] - xm[i]);
        xp[i] = xm[i] = x[i];
    }
    return jac;
}

/// A continuous self-map of a convex domain. Immutable; evaluation must be pure.
class MapModel {
public:
    using Eval = std::function<StateVector(const StateVector&)>;
    using Jacobian = std::function<Matrix(const StateVector&)>;

    MapModel(std::string name, DomainSpec domain, Eval eval, Jacobian jacobian = {})
        : name_(std::move(name)), domain_(std::move(domain)), eval_(std::move(eval)), jacobian_(std::move(jacobian)) {
        if (!eval_) throw Error("map model needs an evaluation function");
    }

    const std::string& name() const { return name_; }
    std::size_t dimension() const { return domain_.dimension(); }
    const DomainSpec& domain() const { return domain_; }
    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }

    StateVector operator()(const StateVector& x) const {
        require_dimension(x, dimension());
        return eval_(x);
    }
    StateVector evaluate(const StateVector& x) const { return (*this)(x); }

    /// Analytic Jacobian when supplied, central finite differences otherwise.
    Matrix jacobian(const StateVector& x) const {
        require_dimension(x, dimension());
        if (jacobian_) return jacobian_(x);
        return finite_difference_jacobian(eval_, x);
    }

private:
    std::string name_;
    DomainSpec domain_;
    Eval eval_;
    Jacobian jacobian_;
};

inline StateVector make_state(std::initializer_list<double> values) {
    StateVector x(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) x[i++] = v;
    return x;
}

} // namespace chaosctl
