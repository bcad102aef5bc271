#include <catch_amalgamated.hpp>

#include <chaosctl/analysis.hpp>
#include <chaosctl/models.hpp>

#include <random>

using namespace chaosctl;
using Catch::Approx;

namespace {

const StateVector kLpaK = make_state({28.01201625, 22.409613, 4.62515125});

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = u(rng);
    return m;
}

} // namespace

TEST_CASE("LPA interior equilibrium", "[analysis][fixed]") {
    const auto f = lpa_model();
    const auto fp = find_fixed_point(f, make_state({20.0, 20.0, 5.0}));
    CHECK(fp.residual < 1e-10);
    CHECK((fp.x - kLpaK).cwiseAbs().maxCoeff() < 1e-6);
    // K satisfies L = b A e^{-c_el L - c_ea A}, P = 0.8 L, A = P e^{-c_pa A} / 0.96
    CHECK(fp.x[1] == Approx(0.8 * fp.x[0]).epsilon(1e-12));
}

TEST_CASE("solver falls back to averaging and reports failure", "[analysis][fixed]") {
    // x -> x + 1 has no fixed point
    const MapModel shift("shift", DomainSpec::full(1), [](const StateVector& x) -> StateVector {
        return x.array() + 1.0;
    });
    FixedPointOptions opts;
    opts.max_iter = 20;
    try {
        find_fixed_point(shift, make_state({0.0}), opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_residual() == Approx(1.0));
        CHECK(e.best_point().size() == 1);
    }
}

TEST_CASE("equilibria are deduplicated", "[analysis][fixed]") {
    const MapModel cubic("cubic", DomainSpec::full(1), [](const StateVector& x) -> StateVector {
        return x.array().cube();
    });
    const auto eq = find_equilibria(cubic, {make_state({0.1}), make_state({-0.2}), make_state({1.2}), make_state({-1.3})});
    CHECK(eq.size() == 3);
}

TEST_CASE("spectral radius of LPA at K", "[analysis][spectral]") {
    const double rho = spectral_radius(lpa_jacobian({}, kLpaK));
    CHECK(rho == Approx(1.380126).margin(1e-6));
    CHECK(local_cstar(rho) == Approx(1.0 - 1.0 / rho).epsilon(1e-15));
}

TEST_CASE("spectral radius is bounded by row and column sums", "[analysis][spectral]") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
        const Matrix m = random_matrix(rng, 2 + trial % 9);
        CHECK(spectral_radius(m) <= std::min(max_abs_row_sum(m), max_abs_col_sum(m)) + 1e-9);
    }
}

TEST_CASE("squaring and eigen-solver radii agree", "[analysis][spectral]") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = random_matrix(rng, 8 + trial);
        const double exact = Eigen::EigenSolver<Matrix>(m, false).eigenvalues().cwiseAbs().maxCoeff();
        CHECK(detail::spectral_radius_by_squaring(m) == Approx(exact).epsilon(1e-6));
    }
    const Matrix big = random_matrix(rng, 60);
    const double exact = Eigen::EigenSolver<Matrix>(big, false).eigenvalues().cwiseAbs().maxCoeff();
    CHECK(spectral_radius(big) == Approx(exact).epsilon(1e-6));
    CHECK(spectral_radius(Matrix::Zero(3, 3)) == 0.0);
    CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("bound A over a box", "[analysis][bound][oracle]") {
    const auto f = lpa_model();
    const SamplingBox s{make_state({0.0, 0.0, 0.0}), make_state({60.0, 60.0, 20.0})};
    const auto a = bound_A(f, s, {20, 0});
    CHECK(a.n_points == 8000);
    CHECK(a.row_bound == Approx(21.96).epsilon(1e-12));
    CHECK(a.col_bound == Approx(31.41).epsilon(1e-12));
    CHECK(a.value == Approx(21.96).epsilon(1e-12));
    CHECK(a.value >= spectral_radius(lpa_jacobian({}, kLpaK)));
}

TEST_CASE("growing S never lowers A", "[analysis][bound]") {
    const auto f = lpa_model();
    // both grids have spacing (5, 5, 2), so the outer lattice contains the inner one
    const SamplingBox inner{make_state({20.0, 15.0, 2.0}), make_state({35.0, 30.0, 8.0})};
    const SamplingBox outer{make_state({10.0, 5.0, 0.0}), make_state({45.0, 40.0, 14.0})};
    const auto a_in = bound_A(f, inner, {4, 0});
    const auto a_out = bound_A(f, outer, {8, 0});
    CHECK(a_out.row_bound >= a_in.row_bound);
    CHECK(a_out.col_bound >= a_in.col_bound);
    CHECK(a_out.value >= a_in.value);
    CHECK(bound_A(f, SamplingBox::point(kLpaK)).value >= spectral_radius(f.jacobian(kLpaK)));
}

TEST_CASE("threshold formulas", "[analysis]") {
    CHECK(local_cstar(0.5) == 0.0);
    CHECK(local_cstar(1.0) == 0.0);
    CHECK(local_cstar(4.0) == 0.75);
    CHECK(global_cstar(2.0) == 0.5);
    CHECK(global_cstar(0.3) == 0.0);
    CHECK_THROWS_AS(local_cstar(-1.0), Error);
}

TEST_CASE("Lipschitz estimate for LPA on a large box", "[analysis][lipschitz][oracle]") {
    const auto f = lpa_model();
    const auto k = find_fixed_point(f, make_state({20.0, 20.0, 5.0})).x;
    const SamplingBox box{StateVector::Zero(3), StateVector::Constant(3, 300.0)};
    const auto est = lipschitz_estimate(f, k, box, {20, 0});
    // M is attained at the corner (0, 300, 0) where the adult component equals 300
    CHECK(est.sup_norm == Approx(300.0).epsilon(1e-12));
    // dense-grid oracle (81^3 on the ball): sup ratio 6.9027
    CHECK(est.raw_ratio <= 6.9027 * 1.01);
    CHECK(est.raw_ratio >= 6.9027 * 0.95);
    CHECK(est.local_ratio == Approx(kLipschitzSafety * est.raw_ratio));
    CHECK(est.value == Approx(300.0 / k.maxCoeff() + 1.0).epsilon(1e-12));
    CHECK(est.n_ball_points > 0);
}

TEST_CASE("Lipschitz estimate preconditions", "[analysis][lipschitz]") {
    const auto f = lpa_model();
    const SamplingBox box{StateVector::Zero(3), StateVector::Constant(3, 50.0)};
    CHECK_THROWS_AS(lipschitz_estimate(f, make_state({1.0, 1.0, 1.0}), box), Error);
    CHECK_THROWS_AS(lipschitz_estimate(f, StateVector::Zero(3), box), Error);
}

TEST_CASE("contraction on the linear test map", "[analysis][contraction]") {
    const StateVector k = make_state({1.0, 2.0});
    const MapModel lin("lin", DomainSpec::full(2), [k](const StateVector& x) -> StateVector { return k + 2.0 * (x - k); });
    const auto chk = verify_contraction(lin, ControlConfig::vmtoc(0.75, k), k, 2.0, make_state({5.0, -3.0}), 30);
    CHECK(chk.holds);
    CHECK(chk.theta == 0.5);
    CHECK(chk.observed_ratio == Approx(0.5).margin(1e-12));
    CHECK_THROWS_AS(verify_contraction(lin, ControlConfig::vmtoc(0.4, k), k, 2.0, k, 5), Error);
    CHECK_THROWS_AS(verify_contraction(lin, ControlConfig::vmtoc(0.75, k.array() + 1.0), k, 2.0, k, 5), Error);
    CHECK_THROWS_AS(verify_contraction(lin, ControlConfig::vtoc(0.75, k), k, 2.0, k, 5), Error);
}

TEST_CASE("stability report on LPA", "[analysis][report]") {
    const auto rep = stability_report(lpa_model(), make_state({20.0, 20.0, 5.0}));
    CHECK(rep.equilibrium_in_S);
    CHECK(rep.rho == Approx(1.380126).margin(1e-6));
    CHECK(rep.bound.value >= rep.rho);
    CHECK(rep.local_cstar_A >= rep.local_cstar_rho);
    CHECK(rep.global_cstar >= 0.0);
    CHECK(rep.global_cstar < 1.0);
}

TEST_CASE("default Lipschitz box is the ball box around K", "[analysis][report]") {
    const auto rep = stability_report(lpa_model(), make_state({20.0, 20.0, 5.0}));
    const double r = rep.equilibrium.maxCoeff();
    CHECK(rep.lipschitz_box.lo.minCoeff() == 0.0);
    CHECK(rep.lipschitz_box.hi[0] == Approx(2.0 * rep.equilibrium[0]));
    CHECK(rep.lipschitz_box.hi[2] == Approx(rep.equilibrium[2] + r));
    CHECK(rep.lipschitz.raw_ratio > 1.0);
    CHECK(rep.lipschitz.value >= rep.lipschitz.local_ratio);
}

TEST_CASE("Lipschitz estimate on closed-form maps", "[analysis][lipschitz]") {
    const StateVector k = make_state({2.0, 1.0});
    const SamplingBox box{make_state({-1.0, -2.0}), make_state({5.0, 4.0})};
    const MapModel constant("const", DomainSpec::full(2), [k](const StateVector&) { return k; });
    const auto c = lipschitz_estimate(constant, k, box);
    CHECK(c.raw_ratio == 0.0);
    CHECK(c.value == 2.0);
    const MapModel half("half", DomainSpec::full(2), [k](const StateVector& x) -> StateVector { return k + 0.5 * (x - k); });
    const auto h = lipschitz_estimate(half, k, box);
    CHECK(h.raw_ratio == Approx(0.5).epsilon(1e-12));
    CHECK(h.local_ratio == Approx(0.525).epsilon(1e-12));
    CHECK(h.value == Approx(std::max(0.525, h.sup_norm / 2.0 + 1.0)));
}

TEST_CASE("local threshold is nondecreasing", "[analysis]") {
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double v = local_cstar(0.01 * i);
        CHECK(v >= prev);
        if (i <= 100) CHECK(v == 0.0);
        prev = v;
    }
}

TEST_CASE("two-stage control makes any interior state a global attractor", "[analysis][contraction]") {
    // bounded map with Lipschitz constant 1 in the max norm
    const MapModel f("bounded", DomainSpec::full(2), [](const StateVector& x) -> StateVector {
        return make_state({1.0 + std::sin(x[1]), 1.0 + std::cos(x[0])});
    });
    const StateVector k = make_state({0.5, -0.25});
    const auto first = target_for_state(f, k, 1.25);
    const auto g1 = controlled_map(f, ControlConfig::vmtoc(first.intensity, first.target));
    REQUIRE(fixed_point_residual(g1, k) < 1e-14);
    const SamplingBox box{StateVector::Constant(2, -6.0), StateVector::Constant(2, 6.0)};
    const double l1 = lipschitz_estimate(g1, k, box, {40, 256}).value;
    const double c_hat = global_cstar(l1) + 0.5 * (1.0 - global_cstar(l1));
    const auto chk = verify_contraction(g1, ControlConfig::vmtoc(c_hat, k), k, l1, make_state({5.0, -5.0}), 200);
    CHECK(chk.holds);

    // the two stages compose into one VMTOC with the same orbit
    const auto both = compose_vmtoc(first, {c_hat, k});
    const auto g = controlled_map(f, ControlConfig::vmtoc(both.intensity, both.target));
    const double theta = (1.0 - c_hat) * l1;
    StateVector x = make_state({-4.0, 3.5});
    const double d0 = norm(x - k);
    for (int n = 1; n <= 60; ++n) {
        x = g(x);
        CHECK(norm(x - k) <= std::pow(theta, n) * d0 + 1e-12);
    }
    CHECK(norm(x - k) < 1e-9);
}

TEST_CASE("MPF drives a linearly bounded map to the origin", "[analysis][contraction]") {
    Matrix a(3, 3);
    a << 1.2, -0.4, 0.4, 0.3, 1.1, -0.6, -0.5, 0.5, 1.0;   // max row sum 2.0
    const double l = max_abs_row_sum(a);
    const MapModel f("linear", DomainSpec::full(3), [a](const StateVector& x) -> StateVector { return a * x; });
    const auto g = controlled_map(f, ControlConfig::mpf(global_cstar(l) + 0.1));
    StateVector x = make_state({3.0, -2.0, 7.0});
    double prev = norm(x);
    for (int n = 0; n < 200; ++n) {
        x = g(x);
        CHECK(norm(x) <= prev);
        prev = norm(x);
    }
    CHECK(prev < 1e-12);
}
