#pragma once

// Run configuration: a flat `key = value` file with dotted section names.
//
//   command = bifurcate
//   model = lpa
//   lpa.b = 10.45
//   control.scheme = vmtoc
//   control.target = 30, 30, 200
//   scan.grid = k/300
//
// Every key has a default; unknown keys are rejected by name.

#include "controls.hpp"
#include "core.hpp"
#include "models.hpp"
#include "sampling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace chaosctl {

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, const std::string& msg) : Error(key + ": " + msg), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Shortest-roundtrip is not needed here; 17 significant digits always round-trips a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_vector(const StateVector& x) {
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        s += format_double(x[i]);
    }
    return s;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty()) throw ConfigError(key, "expected a real number, got '" + text + "'");
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key, "expected a nonnegative integer, got '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + text + "'");
}

inline StateVector parse_vector(const std::string& key, const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(parse_double(key, item));
    if (vals.empty()) return {};
    return Eigen::Map<StateVector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

} // namespace detail

/// Parses a grid spec: `k/N` (c = k/N, k = 0..N-1), `lin:a:b:n` (n evenly spaced values in
/// [a, b]) or an explicit comma-separated list.
inline std::vector<double> parse_grid(const std::string& spec, const std::string& key = "scan.grid") {
    const std::string s = detail::trim(spec);
    std::vector<double> g;
    if (s.rfind("k/", 0) == 0) {
        const auto n = detail::parse_u64(key, s.substr(2));
        if (n == 0) throw ConfigError(key, "k/N needs N >= 1");
        for (std::uint64_t k = 0; k < n; ++k) g.push_back(static_cast<double>(k) / static_cast<double>(n));
    } else if (s.rfind("lin:", 0) == 0) {
        std::vector<std::string> parts;
        std::stringstream ss(s.substr(4));
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() != 3) throw ConfigError(key, "expected lin:a:b:n");
        const double a = detail::parse_double(key, parts[0]), b = detail::parse_double(key, parts[1]);
        const auto n = detail::parse_u64(key, parts[2]);
        if (n == 0) throw ConfigError(key, "lin grid needs n >= 1");
        for (std::uint64_t i = 0; i < n; ++i)
            g.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
        const StateVector v = detail::parse_vector(key, s);
        g.assign(v.data(), v.data() + v.size());
    }
    if (g.empty()) throw ConfigError(key, "empty grid");
    for (double c : g)
        if (!(c >= 0.0 && c < 1.0)) throw ConfigError(key, "grid value " + format_double(c) + " outside [0,1)");
    return g;
}

enum class Command { simulate, equilibrium, stability, bifurcate, bubbles, lyapunov, cost };

inline std::string to_string(Command c) {
    switch (c) {
    case Command::simulate: return "simulate";
    case Command::equilibrium: return "equilibrium";
    case Command::stability: return "stability";
    case Command::bifurcate: return "bifurcate";
    case Command::bubbles: return "bubbles";
    case Command::lyapunov: return "lyapunov";
    case Command::cost: return "cost";
    }
    return "?";
}

inline Command parse_command(const std::string& s, const std::string& key = "command") {
    for (auto c : {Command::simulate, Command::equilibrium, Command::stability, Command::bifurcate, Command::bubbles,
                   Command::lyapunov, Command::cost})
        if (to_string(c) == s) return c;
    throw ConfigError(key, "unknown command '" + s + "'");
}

struct RunConfig {
    Command command = Command::simulate;
    std::string model = "lpa";
    LpaParams lpa{};
    RickerParams ricker{};

    std::optional<ControlConfig> control;

    std::optional<StateVector> x0;     // init.x0; drawn from the init box when absent
    StateVector init_lo, init_hi;      // default [0,50]^d
    std::size_t n_transient = 3000;
    std::size_t n_keep = 50;

    double solver_tol = 1e-10;
    std::size_t solver_max_iter = 500;
    std::optional<StateVector> solver_x0;

    double period_tol = 1e-5;
    std::size_t max_period = 32;

    std::string grid = "k/300";
    bool continuation = false;
    unsigned threads = 0;
    bool scan_cost = false;

    std::optional<SamplingBox> set_s;
    std::optional<SamplingBox> lipschitz_box;
    std::size_t sample_grid = 20;
    std::size_t sample_n = 0;
    NormKind norm_kind = NormKind::max;

    std::size_t lyapunov_n = 20000;
    std::optional<std::size_t> cost_start;
    std::optional<std::size_t> cost_length;

    std::uint64_t seed = 1;
    std::string out = "chaosctl";
    bool strict = false;

    std::size_t dimension() const {
        if (model == "lpa") return 3;
        return static_cast<std::size_t>(ricker.delay);
    }

    StateVector default_solver_x0() const {
        if (model == "lpa") return make_state({20.0, 20.0, 5.0});
        return StateVector::Constant(ricker.delay, ricker.r > 0.0 ? ricker.r : 0.5);
    }

    bool operator==(const RunConfig& o) const {
        auto opt_eq = [](const auto& a, const auto& b) { return a.has_value() == b.has_value() && (!a || *a == *b); };
        auto opt_state_eq = [](const std::optional<StateVector>& a, const std::optional<StateVector>& b) {
            return a.has_value() == b.has_value() && (!a || same_state(*a, *b));
        };
        auto box_eq = [](const std::optional<SamplingBox>& a, const std::optional<SamplingBox>& b) {
            return a.has_value() == b.has_value() && (!a || (same_state(a->lo, b->lo) && same_state(a->hi, b->hi)));
        };
        return command == o.command && model == o.model && lpa == o.lpa && ricker == o.ricker &&
               opt_eq(control, o.control) && opt_state_eq(x0, o.x0) && same_state(init_lo, o.init_lo) && same_state(init_hi, o.init_hi) &&
               n_transient == o.n_transient && n_keep == o.n_keep && solver_tol == o.solver_tol &&
               solver_max_iter == o.solver_max_iter && opt_state_eq(solver_x0, o.solver_x0) && period_tol == o.period_tol &&
               max_period == o.max_period && grid == o.grid && continuation == o.continuation && threads == o.threads &&
               scan_cost == o.scan_cost && box_eq(set_s, o.set_s) && box_eq(lipschitz_box, o.lipschitz_box) &&
               sample_grid == o.sample_grid && sample_n == o.sample_n && norm_kind == o.norm_kind &&
               lyapunov_n == o.lyapunov_n && cost_start == o.cost_start && cost_length == o.cost_length &&
               seed == o.seed && out == o.out && strict == o.strict;
    }
};

using KeyValues = std::map<std::string, std::string>;

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
        kv[key] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

/// Applies a `key=value` override on top of parsed keys.
inline void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(assignment, "override must have the form key=value");
    const std::string key = detail::trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError(assignment, "override has an empty key");
    kv[key] = detail::trim(assignment.substr(eq + 1));
}

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& text, bool positive) {
    const auto v = parse_u64(key, text);
    if (positive && v == 0) throw ConfigError(key, "must be positive");
    return static_cast<std::size_t>(v);
}

inline double parse_positive(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive real");
    return v;
}

inline void check_dim(const std::string& key, const StateVector& v, std::size_t d) {
    if (static_cast<std::size_t>(v.size()) != d)
        throw ConfigError(key, "expected " + std::to_string(d) + " components, got " + std::to_string(v.size()));
}

} // namespace detail

inline RunConfig config_from_key_values(const KeyValues& kv) {
    RunConfig cfg;
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };

    static const std::vector<std::string> known = {
        "command", "model", "lpa.b", "lpa.c_el", "lpa.c_ea", "lpa.c_pa", "lpa.mu_l", "lpa.mu_a", "ricker.r",
        "ricker.d", "control.scheme", "control.c", "control.diag", "control.target", "init.x0", "init.box_lo",
        "init.box_hi", "sim.n_transient", "sim.n_keep", "solver.tol", "solver.max_iter", "solver.x0", "period.tol",
        "period.max", "scan.grid", "scan.continuation", "scan.threads", "scan.cost", "stability.s_lo",
        "stability.s_hi", "stability.lip_lo", "stability.lip_hi", "sample.grid", "sample.n", "norm", "lyapunov.n",
        "cost.window_start", "cost.window_length", "seed", "out", "strict"};
    for (const auto& [k, v] : kv)
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError(k, "unknown key");

    using namespace detail;
    if (auto v = get("command")) cfg.command = parse_command(trim(*v));
    if (auto v = get("model")) {
        cfg.model = trim(*v);
        if (cfg.model != "lpa" && cfg.model != "ricker") throw ConfigError("model", "unknown model '" + cfg.model + "'");
    }
    if (auto v = get("lpa.b")) cfg.lpa.b = parse_double("lpa.b", *v);
    if (auto v = get("lpa.c_el")) cfg.lpa.c_el = parse_double("lpa.c_el", *v);
    if (auto v = get("lpa.c_ea")) cfg.lpa.c_ea = parse_double("lpa.c_ea", *v);
    if (auto v = get("lpa.c_pa")) cfg.lpa.c_pa = parse_double("lpa.c_pa", *v);
    if (auto v = get("lpa.mu_l")) cfg.lpa.mu_l = parse_double("lpa.mu_l", *v);
    if (auto v = get("lpa.mu_a")) cfg.lpa.mu_a = parse_double("lpa.mu_a", *v);
    try {
        cfg.lpa.validate();
    } catch (const Error& e) {
        throw ConfigError("lpa", e.what());
    }
    if (auto v = get("ricker.r")) cfg.ricker.r = parse_double("ricker.r", *v);
    if (auto v = get("ricker.d")) {
        const auto d = parse_u64("ricker.d", *v);
        if (d < 2 || d > 1000) throw ConfigError("ricker.d", "must lie in [2, 1000]");
        cfg.ricker.delay = static_cast<int>(d);
    }
    const std::size_t d = cfg.dimension();

    const std::string scheme = trim(get("control.scheme").value_or("none"));
    if (scheme != "none") {
        ControlConfig cc;
        try {
            cc.scheme = parse_scheme(scheme);
        } catch (const Error& e) {
            throw ConfigError("control.scheme", e.what());
        }
        if (auto v = get("control.c")) cc.intensity = parse_double("control.c", *v);
        if (cc.scheme != Scheme::diag_vmtoc && !(cc.intensity >= 0.0 && cc.intensity < 1.0))
            throw ConfigError("control.c", "intensity must lie in [0,1)");
        if (cc.scheme == Scheme::diag_vmtoc) {
            auto v = get("control.diag");
            if (!v) throw ConfigError("control.diag", "required for the diag scheme");
            cc.diagonal = parse_vector("control.diag", *v);
            check_dim("control.diag", cc.diagonal, d);
            for (Eigen::Index i = 0; i < cc.diagonal.size(); ++i)
                if (!(cc.diagonal[i] >= 0.0 && cc.diagonal[i] < 1.0))
                    throw ConfigError("control.diag", "intensities must lie in [0,1)");
        }
        if (uses_target(cc.scheme)) {
            auto v = get("control.target");
            if (!v) throw ConfigError("control.target", "required for scheme " + scheme);
            cc.target = parse_vector("control.target", *v);
            check_dim("control.target", cc.target, d);
            if ((cc.target.array() < 0.0).any()) throw ConfigError("control.target", "target lies outside the model domain");
        }
        cfg.control = std::move(cc);
    }

    if (auto v = get("init.x0")) {
        cfg.x0 = parse_vector("init.x0", *v);
        check_dim("init.x0", *cfg.x0, d);
    }
    cfg.init_lo = StateVector::Zero(d);
    cfg.init_hi = StateVector::Constant(d, 50.0);
    if (auto v = get("init.box_lo")) cfg.init_lo = parse_vector("init.box_lo", *v);
    if (auto v = get("init.box_hi")) cfg.init_hi = parse_vector("init.box_hi", *v);
    check_dim("init.box_lo", cfg.init_lo, d);
    check_dim("init.box_hi", cfg.init_hi, d);
    if ((cfg.init_lo.array() > cfg.init_hi.array()).any()) throw ConfigError("init.box_lo", "must be <= init.box_hi");

    if (auto v = get("sim.n_transient")) cfg.n_transient = parse_count("sim.n_transient", *v, false);
    if (auto v = get("sim.n_keep")) cfg.n_keep = parse_count("sim.n_keep", *v, true);
    if (auto v = get("solver.tol")) cfg.solver_tol = parse_positive("solver.tol", *v);
    if (auto v = get("solver.max_iter")) cfg.solver_max_iter = parse_count("solver.max_iter", *v, true);
    if (auto v = get("solver.x0")) {
        cfg.solver_x0 = parse_vector("solver.x0", *v);
        check_dim("solver.x0", *cfg.solver_x0, d);
    }
    if (auto v = get("period.tol")) cfg.period_tol = parse_positive("period.tol", *v);
    if (auto v = get("period.max")) cfg.max_period = parse_count("period.max", *v, true);
    if (auto v = get("scan.grid")) {
        parse_grid(*v);
        cfg.grid = trim(*v);
    }
    if (auto v = get("scan.continuation")) cfg.continuation = parse_bool("scan.continuation", *v);
    if (auto v = get("scan.threads")) cfg.threads = static_cast<unsigned>(parse_count("scan.threads", *v, false));
    if (auto v = get("scan.cost")) cfg.scan_cost = parse_bool("scan.cost", *v);

    auto read_box = [&](const std::string& lo_key, const std::string& hi_key) -> std::optional<SamplingBox> {
        auto lo = get(lo_key), hi = get(hi_key);
        if (!lo && !hi) return std::nullopt;
        if (!lo || !hi) throw ConfigError(lo ? hi_key : lo_key, "both box bounds are required");
        SamplingBox b{parse_vector(lo_key, *lo), parse_vector(hi_key, *hi)};
        check_dim(lo_key, b.lo, d);
        check_dim(hi_key, b.hi, d);
        if ((b.lo.array() > b.hi.array()).any()) throw ConfigError(lo_key, "must be <= " + hi_key);
        return b;
    };
    cfg.set_s = read_box("stability.s_lo", "stability.s_hi");
    cfg.lipschitz_box = read_box("stability.lip_lo", "stability.lip_hi");
    if (auto v = get("sample.grid")) cfg.sample_grid = parse_count("sample.grid", *v, false);
    if (auto v = get("sample.n")) cfg.sample_n = parse_count("sample.n", *v, false);
    if (cfg.sample_grid == 0 && cfg.sample_n == 0) throw ConfigError("sample.grid", "sample.grid and sample.n are both zero");
    if (auto v = get("norm")) {
        try {
            cfg.norm_kind = parse_norm_kind(trim(*v));
        } catch (const Error& e) {
            throw ConfigError("norm", e.what());
        }
    }
    if (auto v = get("lyapunov.n")) {
        cfg.lyapunov_n = parse_count("lyapunov.n", *v, true);
        if (cfg.lyapunov_n < 1000) throw ConfigError("lyapunov.n", "must be >= 1000");
    }
    if (auto v = get("cost.window_start")) cfg.cost_start = parse_count("cost.window_start", *v, false);
    if (auto v = get("cost.window_length")) cfg.cost_length = parse_count("cost.window_length", *v, true);
    if (auto v = get("seed")) cfg.seed = parse_u64("seed", *v);
    if (auto v = get("out")) {
        cfg.out = trim(*v);
        if (cfg.out.empty()) throw ConfigError("out", "output prefix must not be empty");
    }
    if (auto v = get("strict")) cfg.strict = parse_bool("strict", *v);
    return cfg;
}

inline KeyValues to_key_values(const RunConfig& cfg) {
    KeyValues kv;
    kv["command"] = to_string(cfg.command);
    kv["model"] = cfg.model;
    kv["lpa.b"] = format_double(cfg.lpa.b);
    kv["lpa.c_el"] = format_double(cfg.lpa.c_el);
    kv["lpa.c_ea"] = format_double(cfg.lpa.c_ea);
    kv["lpa.c_pa"] = format_double(cfg.lpa.c_pa);
    kv["lpa.mu_l"] = format_double(cfg.lpa.mu_l);
    kv["lpa.mu_a"] = format_double(cfg.lpa.mu_a);
    kv["ricker.r"] = format_double(cfg.ricker.r);
    kv["ricker.d"] = std::to_string(cfg.ricker.delay);
    if (cfg.control) {
        kv["control.scheme"] = to_string(cfg.control->scheme);
        kv["control.c"] = format_double(cfg.control->intensity);
        if (cfg.control->scheme == Scheme::diag_vmtoc) kv["control.diag"] = format_vector(cfg.control->diagonal);
        if (uses_target(cfg.control->scheme)) kv["control.target"] = format_vector(cfg.control->target);
    } else {
        kv["control.scheme"] = "none";
    }
    if (cfg.x0) kv["init.x0"] = format_vector(*cfg.x0);
    kv["init.box_lo"] = format_vector(cfg.init_lo);
    kv["init.box_hi"] = format_vector(cfg.init_hi);
    kv["sim.n_transient"] = std::to_string(cfg.n_transient);
    kv["sim.n_keep"] = std::to_string(cfg.n_keep);
    kv["solver.tol"] = format_double(cfg.solver_tol);
    kv["solver.max_iter"] = std::to_string(cfg.solver_max_iter);
    if (cfg.solver_x0) kv["solver.x0"] = format_vector(*cfg.solver_x0);
    kv["period.tol"] = format_double(cfg.period_tol);
    kv["period.max"] = std::to_string(cfg.max_period);
    kv["scan.grid"] = cfg.grid;
    kv["scan.continuation"] = cfg.continuation ? "true" : "false";
    kv["scan.threads"] = std::to_string(cfg.threads);
    kv["scan.cost"] = cfg.scan_cost ? "true" : "false";
    if (cfg.set_s) {
        kv["stability.s_lo"] = format_vector(cfg.set_s->lo);
        kv["stability.s_hi"] = format_vector(cfg.set_s->hi);
    }
    if (cfg.lipschitz_box) {
        kv["stability.lip_lo"] = format_vector(cfg.lipschitz_box->lo);
        kv["stability.lip_hi"] = format_vector(cfg.lipschitz_box->hi);
    }
    kv["sample.grid"] = std::to_string(cfg.sample_grid);
    kv["sample.n"] = std::to_string(cfg.sample_n);
    kv["norm"] = to_string(cfg.norm_kind);
    kv["lyapunov.n"] = std::to_string(cfg.lyapunov_n);
    if (cfg.cost_start) kv["cost.window_start"] = std::to_string(*cfg.cost_start);
    if (cfg.cost_length) kv["cost.window_length"] = std::to_string(*cfg.cost_length);
    kv["seed"] = std::to_string(cfg.seed);
    kv["out"] = cfg.out;
    kv["strict"] = cfg.strict ? "true" : "false";
    return kv;
}

inline void write_config(std::ostream& os, const RunConfig& cfg) {
    for (const auto& [k, v] : to_key_values(cfg)) os << k << " = " << v << '\n';
}

inline RunConfig read_config(std::istream& in, const std::vector<std::string>& overrides = {}) {
    KeyValues kv = parse_key_values(in);
    for (const auto& o : overrides) apply_override(kv, o);
    return config_from_key_values(kv);
}

inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot read '" + path + "'");
    return read_config(in, overrides);
}

} // namespace chaosctl
