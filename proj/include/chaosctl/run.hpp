#pragma once

// Command execution behind the chaosctl CLI. Each command writes some of
//   <prefix>.report.txt   `key = value` lines
//   <prefix>.orbit.csv    step,component,value
//   <prefix>.scan.csv     c,step,component,value,period[,cost]
// and returns the process exit status.

#include "analysis.hpp"
#include "config.hpp"
#include "controls.hpp"
#include "cost.hpp"
#include "dynamics.hpp"
#include "models.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace chaosctl {

/// Ordered `key = value` report.
class Report {
public:
    void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void add(const std::string& key, double value) { add(key, format_double(value)); }
    void add(const std::string& key, const StateVector& value) { add(key, format_vector(value)); }
    void add_count(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
    void add_flag(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }

    const std::vector<std::pair<std::string, std::string>>& lines() const { return lines_; }

    std::optional<std::string> find(const std::string& key) const {
        for (const auto& [k, v] : lines_)
            if (k == key) return v;
        return std::nullopt;
    }

    void write(std::ostream& os) const {
        for (const auto& [k, v] : lines_) os << k << " = " << v << '\n';
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

inline void add_stability(Report& rep, const StabilityReport& s) {
    rep.add("equilibrium", s.equilibrium);
    rep.add("equilibrium.residual", s.residual);
    rep.add("rho", s.rho);
    rep.add("A", s.bound.value);
    rep.add("A.row_bound", s.bound.row_bound);
    rep.add("A.col_bound", s.bound.col_bound);
    rep.add_count("A.n_points", s.bound.n_points);
    rep.add("L", s.lipschitz.value);
    rep.add("L.local_ratio", s.lipschitz.local_ratio);
    rep.add("L.raw_ratio", s.lipschitz.raw_ratio);
    rep.add("L.sup_norm", s.lipschitz.sup_norm);
    rep.add("L.norm_K", s.lipschitz.norm_k);
    rep.add_count("L.n_points", s.lipschitz.n_points);
    rep.add("local_cstar_rho", s.local_cstar_rho);
    rep.add("local_cstar_A", s.local_cstar_A);
    rep.add("global_cstar", s.global_cstar);
    rep.add("S.lo", s.set_s.lo);
    rep.add("S.hi", s.set_s.hi);
    rep.add_flag("S.contains_equilibrium", s.equilibrium_in_S);
    rep.add("lipschitz_box.lo", s.lipschitz_box.lo);
    rep.add("lipschitz_box.hi", s.lipschitz_box.hi);
    rep.add("norm", to_string(s.norm_kind));
    rep.add("provenance.rho", std::string("spectral radius of Jf at the equilibrium"));
    rep.add("provenance.local_cstar_rho", std::string("max{0, 1 - 1/rho}"));
    rep.add("provenance.local_cstar_A",
            std::string("max{0, 1 - 1/A}, A = min{max row sum, max column sum} of |Jf| over S; sampled estimate"));
    rep.add("provenance.global_cstar",
            std::string("1 - 1/L (0 if L <= 1), L = max{1.05 L~, M/||K|| + 1} over the Lipschitz box; sampled estimate"));
    rep.add("note", std::string("constants are sampled estimates on a compact box, not certified bounds; "
                                "global thresholds hold only on that compact restriction"));
}

class Runner {
public:
    Runner(RunConfig cfg, std::ostream& diag) : cfg_(std::move(cfg)), diag_(diag) {}

    int run() {
        switch (cfg_.command) {
        case Command::simulate: simulate(); break;
        case Command::equilibrium: equilibrium(); break;
        case Command::stability: stability(); break;
        case Command::bifurcate: bifurcate(false); break;
        case Command::bubbles: bifurcate(true); break;
        case Command::lyapunov: lyapunov(); break;
        case Command::cost: cost(); break;
        }
        write_report();
        return 0;
    }

    const Report& report() const { return report_; }

private:
    MapModel base_model() const {
        if (cfg_.model == "lpa") return lpa_model(cfg_.lpa, cfg_.strict);
        return ricker_lift(cfg_.ricker);
    }

    MapModel model() const { return controlled_map(base_model(), cfg_.control); }

    StateVector initial_state() const {
        if (cfg_.x0) return *cfg_.x0;
        std::mt19937_64 rng(cfg_.seed);
        return uniform_in_box(rng, cfg_.init_lo, cfg_.init_hi);
    }

    OrbitOptions orbit_options() {
        OrbitOptions o;
        o.strict = cfg_.strict;
        o.on_domain_violation = [this](std::size_t step, const StateVector&) {
            if (domain_warnings_++ < 5) diag_ << "warning: state outside the model domain at step " << step << '\n';
        };
        return o;
    }

    void header() {
        report_.add("command", to_string(cfg_.command));
        report_.add("model", cfg_.model);
        report_.add("control", cfg_.control ? to_string(cfg_.control->scheme) : std::string("none"));
        if (cfg_.control) {
            if (cfg_.control->scheme == Scheme::diag_vmtoc)
                report_.add("control.diag", cfg_.control->diagonal);
            else
                report_.add("control.c", cfg_.control->intensity);
            if (uses_target(cfg_.control->scheme)) report_.add("control.target", cfg_.control->target);
        }
        report_.add("seed", std::to_string(cfg_.seed));
    }

    void simulate() {
        header();
        const StateVector x0 = initial_state();
        const auto orbit = iterate_orbit(model(), x0, cfg_.n_transient, cfg_.n_keep, orbit_options());
        std::ofstream csv = open(cfg_.out + ".orbit.csv");
        csv << "step,component,value\n";
        for (std::size_t i = 0; i < orbit.size(); ++i)
            for (Eigen::Index j = 0; j < orbit[i].size(); ++j)
                csv << (cfg_.n_transient + i + 1) << ',' << (j + 1) << ',' << format_double(orbit[i][j]) << '\n';
        report_.add("x0", x0);
        report_.add_count("n_transient", cfg_.n_transient);
        report_.add_count("n_keep", cfg_.n_keep);
        report_.add("final_state", orbit.back());
        const std::size_t maxp = std::min(cfg_.max_period, orbit.size() / 2);
        if (maxp >= 1) {
            const auto periods = detect_period(orbit, cfg_.period_tol, maxp);
            std::string s;
            for (std::size_t j = 0; j < periods.size(); ++j) s += (j ? ", " : "") + to_string(periods[j]);
            report_.add("period", s);
        }
        report_.add_count("domain_warnings", domain_warnings_);
    }

    void equilibrium() {
        header();
        const MapModel g = model();
        FixedPointOptions fo;
        fo.tol = cfg_.solver_tol;
        fo.max_iter = cfg_.solver_max_iter;
        const auto fp = find_fixed_point(g, cfg_.solver_x0.value_or(cfg_.default_solver_x0()), fo);
        const double rho = spectral_radius(g.jacobian(fp.x));
        report_.add("equilibrium", fp.x);
        report_.add("residual", fp.residual);
        report_.add_count("iterations", fp.iterations);
        report_.add("rho", rho);
        report_.add_flag("locally_stable", rho < 1.0);
    }

    void stability() {
        header();
        StabilityOptions so;
        so.set_s = cfg_.set_s;
        so.lipschitz_box = cfg_.lipschitz_box;
        so.sampling = {cfg_.sample_grid, cfg_.sample_n};
        so.solver.tol = cfg_.solver_tol;
        so.solver.max_iter = cfg_.solver_max_iter;
        so.norm_kind = cfg_.norm_kind;
        const auto s = stability_report(base_model(), cfg_.solver_x0.value_or(cfg_.default_solver_x0()), so);
        add_stability(report_, s);
        if (!s.equilibrium_in_S) diag_ << "warning: the computed equilibrium lies outside S\n";
    }

    void bifurcate(bool bubbles_only) {
        header();
        if (!cfg_.control) throw ConfigError("control.scheme", "bifurcation scans need a control scheme");
        const MapModel f = base_model();
        const auto grid = parse_grid(cfg_.grid);
        SeedPolicy sp{cfg_.seed, cfg_.init_lo, cfg_.init_hi, cfg_.continuation};
        ScanOptions so{cfg_.n_transient, cfg_.n_keep, cfg_.period_tol, cfg_.max_period, cfg_.threads};
        const auto scan = bifurcation_scan(f, *cfg_.control, grid, sp, so);

        std::size_t failures = 0;
        for (const auto& rec : scan) {
            if (!rec.error) continue;
            ++failures;
            diag_ << "warning: c = " << format_double(rec.c) << ": " << *rec.error << '\n';
        }
        if (!bubbles_only) write_scan_csv(f, scan);
        report_.add("grid", cfg_.grid);
        report_.add_count("grid.size", grid.size());
        report_.add_count("n_transient", cfg_.n_transient);
        report_.add_count("n_keep", cfg_.n_keep);
        report_.add_count("failures", failures);
        if (auto idx = settled_index(scan))
            report_.add("settled_c", scan[*idx].c);
        else
            report_.add("settled_c", std::string("none"));

        const auto bubbles = detect_bubbles(scan);
        report_.add_count("bubbles.count", bubbles.size());
        for (std::size_t i = 0; i < bubbles.size(); ++i)
            report_.add("bubble." + std::to_string(i),
                        std::to_string(bubbles[i].component + 1) + ", " + format_double(bubbles[i].c_lo) + ", " +
                            format_double(bubbles[i].c_hi));
    }

    void write_scan_csv(const MapModel& f, const std::vector<ScanRecord>& scan) {
        const bool with_cost =
            cfg_.scan_cost && (cfg_.control->scheme == Scheme::vmtoc || cfg_.control->scheme == Scheme::diag_vmtoc);
        std::ofstream csv = open(cfg_.out + ".scan.csv");
        csv << "c,step,component,value,period" << (with_cost ? ",cost" : "") << '\n';
        for (const auto& rec : scan) {
            if (rec.error) continue;
            std::string cost_col;
            if (with_cost) {
                const auto est = cost_per_step(f, cfg_.control->with_intensity(rec.c), rec.points,
                                               {0, rec.points.size()}, cfg_.norm_kind);
                cost_col = "," + format_double(est.per_step);
            }
            for (std::size_t i = 0; i < rec.points.size(); ++i)
                for (Eigen::Index j = 0; j < rec.points[i].size(); ++j)
                    csv << format_double(rec.c) << ',' << i << ',' << (j + 1) << ','
                        << format_double(rec.points[i][j]) << ',' << to_string(rec.periods[j]) << cost_col << '\n';
        }
    }

    void lyapunov() {
        header();
        const StateVector x0 = initial_state();
        const double lam = lyapunov_max(model(), x0, cfg_.lyapunov_n);
        report_.add("x0", x0);
        report_.add_count("lyapunov.n", cfg_.lyapunov_n);
        report_.add("lyapunov_max", lam);
    }

    void cost() {
        header();
        if (!cfg_.control) throw ConfigError("control.scheme", "cost needs a VMTOC or diag control");
        const MapModel f = base_model();
        const StateVector x0 = initial_state();
        const auto orbit = iterate_orbit(controlled_map(f, *cfg_.control), x0, cfg_.n_transient, cfg_.n_keep,
                                         orbit_options());
        const std::size_t start = cfg_.cost_start.value_or(0);
        if (start >= orbit.size()) throw ConfigError("cost.window_start", "window starts past the retained orbit");
        CostWindow w{start, cfg_.cost_length.value_or(orbit.size() - start)};
        const auto est = cost_per_step(f, *cfg_.control, orbit, w, cfg_.norm_kind);
        report_.add("x0", x0);
        report_.add("P", est.per_step);
        report_.add_count("window.start", cfg_.n_transient + 1 + w.start);
        report_.add_count("window.length", w.length);
        report_.add("norm", to_string(est.norm_kind));
        report_.add("excluded", std::string("asymmetric culling/restocking costs; stage-dependent costs"));
    }

    std::ofstream open(const std::string& path) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw Error("cannot write '" + path + "'");
        return os;
    }

    void write_report() {
        std::ofstream os = open(cfg_.out + ".report.txt");
        report_.write(os);
    }

    RunConfig cfg_;
    std::ostream& diag_;
    Report report_;
    std::size_t domain_warnings_ = 0;
};

/// Runs one command; errors become a diagnostic line and a nonzero status.
inline int run(const RunConfig& cfg, std::ostream& diag) {
    try {
        Runner r(cfg, diag);
        return r.run();
    } catch (const ConfigError& e) {
        diag << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace chaosctl
