// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chaosctl/analysis.hpp>
#include <chaosctl/controls.hpp>
#include <chaosctl/dynamics.hpp>
#include <chaosctl/models.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace chaosctl;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0 && secs >= limit_s) {
        out.pass = false;
        out.detail += " [over time limit " + std::to_string(limit_s) + " s]";
    }
    if (!out.pass) ++failures;
    std::printf("criterion %2d %s: %s (%.3f s) %s\n", id, out.pass ? "PASS" : "FAIL", title, secs, out.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string vec(const StateVector& x) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt("%.6f", x[i]);
    return s + ")";
}

const StateVector kPaperK = make_state({28.0120, 22.4096, 4.6251});

StateVector lpa_equilibrium() { return find_fixed_point(lpa_model(), make_state({20.0, 20.0, 5.0})).x; }

SeedPolicy lpa_seeds() { return {1, StateVector::Zero(3), StateVector::Constant(3, 50.0), false}; }

std::vector<ScanRecord> lpa_scan(const StateVector& target) {
    return bifurcation_scan(lpa_model(), ControlConfig::vmtoc(0.0, target), fraction_grid(300), lpa_seeds());
}

StateVector uniform(std::mt19937_64& rng, double lo, double hi, Eigen::Index d = 3) {
    std::uniform_real_distribution<double> u(lo, hi);
    StateVector x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = u(rng);
    return x;
}

Outcome settles_without_relapse(const StateVector& target) {
    const auto scan = lpa_scan(target);
    std::size_t first = scan.size();
    for (std::size_t i = 0; i < scan.size(); ++i)
        if (scan[i].all_stable()) {
            first = i;
            break;
        }
    if (first == scan.size()) return {false, "never reaches period 1"};
    for (std::size_t i = first; i < scan.size(); ++i)
        if (!scan[i].all_stable()) return {false, "loses period 1 at c=" + fmt("%.4f", scan[i].c)};
    return {true, "period 1 from c=" + fmt("%.4f", scan[first].c)};
}

} // namespace

int main() {
    criterion(1, "LPA fixed point", 1.0, [] {
        const auto fp = find_fixed_point(lpa_model(), make_state({20.0, 20.0, 5.0}));
        const double dev = (fp.x - kPaperK).cwiseAbs().maxCoeff();
        return Outcome{dev <= 1e-3, "K=" + vec(fp.x) + fmt(" max dev %.2e", dev)};
    });

    criterion(2, "spectral radius and local threshold", 1.0, [] {
        const double rho = spectral_radius(lpa_jacobian({}, lpa_equilibrium()));
        const double cs = local_cstar(rho);
        const bool ok = std::abs(rho - 1.3803) <= 1e-3 && std::abs(cs - 0.2756) <= 1e-3;
        return Outcome{ok, fmt("rho=%.6f", rho) + fmt(" c*=%.6f", cs)};
    });

    criterion(3, "stabilization threshold scan, T=K", 30.0, [] {
        const auto scan = lpa_scan(lpa_equilibrium());
        bool high_ok = true, low_unstable = false;
        double worst = -1.0;
        for (const auto& r : scan) {
            if (r.c >= 0.30 && !r.all_stable()) {
                high_ok = false;
                worst = r.c;
            }
            if (r.c <= 0.20 && !r.all_stable()) low_unstable = true;
        }
        const auto idx = settled_index(scan);
        std::string d = "settled at c=" + (idx ? fmt("%.4f", scan[*idx].c) : std::string("none"));
        if (!high_ok) d += fmt(", not period 1 at c=%.4f", worst);
        if (!low_unstable) d += ", no instability below 0.20";
        return Outcome{high_ok && low_unstable, d};
    });

    criterion(4, "bubble for T1=(30,30,200)", 30.0, [] {
        const auto scan = lpa_scan(make_state({30.0, 30.0, 200.0}));
        const auto bubbles = detect_bubbles(scan);
        std::string d;
        bool ok = true;
        double lo = 1.0, hi = 0.0;
        for (std::size_t comp : {0u, 1u}) {
            const Bubble* hit = nullptr;
            for (const auto& b : bubbles)
                if (b.component == comp && b.c_hi > 0.20 && b.c_lo < 0.33) hit = &b;
            const char* name = comp == 0 ? "L" : "P";
            if (!hit) {
                ok = false;
                d += std::string(name) + ": no bubble; ";
                continue;
            }
            d += std::string(name) + fmt(": [%.4f, ", hit->c_lo) + fmt("%.4f]; ", hit->c_hi);
            if (!(hit->c_lo > 0.15 && hit->c_hi < 0.40)) {
                ok = false;
                d += std::string(name) + " bubble not inside (0.15, 0.40); ";
            }
            lo = std::min(lo, hit->c_lo);
            hi = std::max(hi, hit->c_hi);
        }
        std::size_t a_unstable = 0;
        for (const auto& r : scan) {
            if (r.c >= lo && r.c <= hi && !r.stable(2)) ++a_unstable;
            if (r.c >= 0.45 && !r.all_stable()) {
                ok = false;
                d += fmt("not period 1 at c=%.4f; ", r.c);
            }
        }
        if (a_unstable) {
            ok = false;
            d += "A not period 1 at " + std::to_string(a_unstable) + " grid values inside the bubble";
        }
        return Outcome{ok, d};
    });

    criterion(5, "no bubbles for T2 and T3", 60.0, [] {
        const auto t2 = settles_without_relapse(make_state({30.0, 200.0, 30.0}));
        const auto t3 = settles_without_relapse(make_state({200.0, 30.0, 30.0}));
        return Outcome{t2.pass && t3.pass, "T2: " + t2.detail + "; T3: " + t3.detail};
    });

    criterion(6, "delayed Ricker 2-cycle", 5.0, [] {
        const auto f = ricker_lift({2.0, 2});
        const StateVector x0 = make_state({0.5, 0.3});
        const auto ctl = ControlConfig::vmtoc(0.4, make_state({1.0, 3.0}));
        const auto controlled = iterate_orbit(f, ctl, x0, 2000, 100);
        const auto free = iterate_orbit(f, std::nullopt, x0, 2000, 400);
        const Period pc = detect_period(delay_series(controlled), 1e-6, 32);
        const Period pf = detect_period(delay_series(free), 1e-6, 32);
        const auto state_periods = detect_period(controlled, 1e-6, 32);
        const bool ok = pc == Period{2} && (!pf || *pf > 2);
        return Outcome{ok, "controlled population period " + to_string(pc) + " (state " + vec(controlled.back()) +
                               ", vector period " + to_string(overall_period(state_periods)) +
                               "); uncontrolled " + to_string(pf)};
    });

    criterion(7, "VTOC/VMTOC conjugacy", 0.0, [] {
        const auto f = lpa_model();
        std::mt19937_64 rng(2024);
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const double c = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const StateVector t = uniform(rng, 0.0, 50.0);
            const auto vtoc = ControlConfig::vtoc(c, t), vmtoc = ControlConfig::vmtoc(c, t);
            StateVector x = uniform(rng, 0.0, 50.0);
            StateVector y = conjugate_state(vtoc, x);
            for (int n = 0; n < 100; ++n) {
                x = apply_control(f, vtoc, x);
                y = apply_control(f, vmtoc, y);
                worst = std::max(worst, (conjugate_state(vtoc, x) - y).cwiseAbs().maxCoeff());
            }
        }
        return Outcome{worst < 1e-9, fmt("max deviation %.3e", worst)};
    });

    criterion(8, "VMTOC composition", 0.0, [] {
        const auto f = lpa_model();
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> uc(0.0, 1.0);
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const VmtocPair a{uc(rng), uniform(rng, 0.0, 50.0)}, b{uc(rng), uniform(rng, 0.0, 50.0)};
            const auto ab = compose_vmtoc(a, b);
            const auto first = ControlConfig::vmtoc(a.intensity, a.target);
            const auto single = ControlConfig::vmtoc(ab.intensity, ab.target);
            const StateVector x = uniform(rng, 0.0, 50.0);
            const StateVector fa = apply_control(f, first, x);
            const StateVector twice = b.intensity * b.target + (1.0 - b.intensity) * fa;
            worst = std::max(worst, (twice - apply_control(f, single, x)).cwiseAbs().maxCoeff());
        }
        return Outcome{worst <= 1e-12, fmt("max deviation %.3e", worst)};
    });

    criterion(9, "contraction certificate", 0.0, [] {
        const StateVector k = make_state({1.0, -2.0, 0.5});
        const MapModel lin("linear", DomainSpec::full(3),
                           [k](const StateVector& x) -> StateVector { return k + 2.0 * (x - k); });
        const auto chk = verify_contraction(lin, ControlConfig::vmtoc(0.75, k), k, 2.0, make_state({4.0, 3.0, -7.0}), 40);
        const bool lin_ok = chk.holds && std::abs(chk.observed_ratio - 0.5) <= 1e-12;

        const auto f = lpa_model();
        const StateVector kl = lpa_equilibrium();
        const SamplingBox box{StateVector::Zero(3), StateVector::Constant(3, 300.0)};
        const auto est = lipschitz_estimate(f, kl, box);
        std::mt19937_64 rng(5);
        bool lpa_ok = true;
        double observed = 0.0;
        for (int s = 0; s < 20; ++s) {
            const auto c = verify_contraction(f, ControlConfig::vmtoc(0.95, kl), kl, est.value, uniform(rng, 0.0, 300.0), 200);
            lpa_ok = lpa_ok && c.holds;
            observed = std::max(observed, c.observed_ratio);
        }
        return Outcome{lin_ok && lpa_ok, fmt("linear ratio %.15f", chk.observed_ratio) + fmt("; LPA L=%.4f", est.value) +
                                             fmt(" theta=%.4f", 0.05 * est.value) + fmt(" observed %.4f", observed)};
    });

    criterion(10, "eigenvalue bound", 0.0, [] {
        std::mt19937_64 rng(10);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::uniform_int_distribution<int> dim(2, 10);
        int violations = 0;
        for (int s = 0; s < 1000; ++s) {
            const int d = dim(rng);
            Matrix m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) m(i, j) = u(rng);
            if (spectral_radius(m) > std::min(max_abs_row_sum(m), max_abs_col_sum(m)) + 1e-9) ++violations;
        }
        return Outcome{violations == 0, std::to_string(violations) + " violations"};
    });

    criterion(11, "LPA Jacobian consistency", 0.0, [] {
        const auto f = lpa_model();
        std::mt19937_64 rng(11);
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const StateVector x = uniform(rng, 0.0, 300.0);
            const Matrix a = f.jacobian(x);
            Matrix n(3, 3);
            for (int i = 0; i < 3; ++i) {
                const double h = 1e-6 * (1.0 + std::abs(x[i]));
                StateVector xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                n.col(i) = (f(xp) - f(xm)) / (xp[i] - xm[i]);
            }
            worst = std::max(worst, (a - n).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
        }
        return Outcome{worst <= 1e-5, fmt("max relative error %.3e", worst)};
    });

    criterion(12, "LPA norm bound", 0.0, [] {
        const LpaParams p;
        const double bound = p.recruitment_bound();
        const auto f = lpa_model(p);
        std::mt19937_64 rng(12);
        int n = 0, violations = 0;
        while (n < 10000) {
            const StateVector x = uniform(rng, 0.0, 4.0 * bound);
            if (x.cwiseAbs().maxCoeff() < bound) continue;
            ++n;
            if (norm(f(x)) > norm(x)) ++violations;
        }
        return Outcome{violations == 0, fmt("bound %.6f, ", bound) + std::to_string(violations) + " violations"};
    });

    criterion(13, "Lyapunov sign", 0.0, [] {
        const auto f = lpa_model();
        const StateVector k = lpa_equilibrium();
        const StateVector x0 = make_state({10.0, 10.0, 10.0});
        const double free = lyapunov_max(f, std::nullopt, x0, 20000);
        const double ctl = lyapunov_max(f, ControlConfig::vmtoc(0.5, k), x0, 20000);
        return Outcome{free > 0.0 && ctl < 0.0, fmt("uncontrolled %.4f", free) + fmt(", controlled %.4f", ctl)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
