#include <doctest.h>

#include <random>

#include "oracles/qp_enumeration.hpp"
#include "vvc/controller.hpp"
#include "vvc/error.hpp"

using namespace vvc;

TEST_CASE("droop piecewise map") {
    const DroopCurve c{0.96, 0.99, 1.01, 1.04, 30.0, -20.0};
    REQUIRE(c.valid());
    CHECK(droop_eval(c, 1.0) == 0.0);
    CHECK(droop_eval(c, 0.90) == 30.0);
    CHECK(droop_eval(c, 0.96) == doctest::Approx(30.0));
    CHECK(droop_eval(c, 0.975) == doctest::Approx(15.0));
    CHECK(droop_eval(c, 1.025) == doctest::Approx(-10.0));
    CHECK(droop_eval(c, 1.04) == doctest::Approx(-20.0));
    CHECK(droop_eval(c, 1.20) == -20.0);

    // Continuous and non-increasing.
    double prev = droop_eval(c, 0.8);
    for (double v = 0.8; v <= 1.2; v += 1e-4) {
        const double q = droop_eval(c, v);
        CHECK(q <= prev + 1e-12);
        CHECK(std::abs(q - prev) < 30.0 / 0.03 * 1e-4 + 1e-9);
        prev = q;
    }
    CHECK_FALSE(DroopCurve{1.0, 0.99, 1.01, 1.04, 1.0, -1.0}.valid());
}

namespace {

MlDroopCurve sample_curve() {
    MlDroopCurve c;
    c.inverter_bus = 3;
    c.breakpoints = {{0.9, 25.0}, {0.95, 20.0}, {1.0, 0.0}, {1.05, 0.0}, {1.1, -20.0}};
    c.q_min = -20.0;
    c.q_max = 20.0;
    return c;
}

}  // namespace

TEST_CASE("ML-droop filtered step") {
    const auto c = sample_curve();
    const double v = 1.075;
    const double f = c.eval(v);
    CHECK(f == doctest::Approx(-10.0));
    CHECK(mldroop_step(c, f, v) == doctest::Approx(f));
    CHECK(mldroop_step(c, 0.0, v) == doctest::Approx(0.8 * f));
    CHECK(c.eval(0.85) == 20.0);  // clamped to the box

    double q = 0.0;
    for (int i = 0; i < 60; ++i) q = mldroop_step(c, q, 1.1);
    CHECK(q == doctest::Approx(c.q_min).epsilon(1e-12));
}

TEST_CASE("OFO dual update arithmetic") {
    OfoState s;
    s.alpha = 4.0;
    s.h = Eigen::MatrixXd::Constant(1, 1, 0.5);
    s.monitored = {1};
    s.lambda_min = {0.0};
    s.lambda_max = {0.0};
    s.q_unit_kvar = 1.0;
    const std::vector<double> lo{-100.0}, hi{100.0};

    std::vector<double> v{1.06};
    const auto r = ofo_step(s, {v, 0.0}, lo, hi, 0.95, 1.05);
    CHECK(r.state.lambda_max[0] == doctest::Approx(0.04));
    CHECK(r.state.lambda_min[0] == 0.0);
    CHECK(r.q[0] == doctest::Approx(-0.02));

    // No violation, zero duals: nothing happens.
    v = {1.0};
    const auto idle = ofo_step(s, {v, 0.0}, lo, hi, 0.95, 1.05);
    CHECK(idle.state.lambda_max[0] == 0.0);
    CHECK(idle.q[0] == 0.0);

    std::vector<double> wrong{1.0, 1.0};
    CHECK_THROWS_AS(ofo_step(s, {wrong, 0.0}, lo, hi, 0.95, 1.05), InvalidArgument);
    CHECK_THROWS_AS(ofo_step(s, {v, 0.0}, std::vector<double>{}, hi, 0.95, 1.05), InvalidArgument);
}

TEST_CASE("OFO projection equals the QP projection onto the box") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        OfoState s;
        s.h = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return u(rng) * 2e-4; });
        s.monitored.resize(n);
        s.lambda_min.resize(n);
        s.lambda_max.resize(n);
        std::vector<double> v(n), lo(n), hi(n);
        for (int i = 0; i < n; ++i) {
            s.lambda_min[i] = u(rng) < 0.5 ? 0.0 : u(rng) * 0.05;
            s.lambda_max[i] = u(rng) < 0.5 ? 0.0 : u(rng) * 0.05;
            v[i] = 0.9 + 0.2 * u(rng);
            hi[i] = 40.0 * u(rng);
            lo[i] = -40.0 * u(rng);
        }
        const auto r = ofo_step(s, {v, 0.0}, lo, hi, 0.95, 1.05);

        // Unconstrained target from the updated duals.
        Eigen::VectorXd dl(n);
        for (int i = 0; i < n; ++i) dl(i) = r.state.lambda_min[i] - r.state.lambda_max[i];
        const Eigen::VectorXd q_unc = s.q_unit_kvar * (s.h.transpose() * dl);
        Eigen::MatrixXd g(2 * n, n);
        Eigen::VectorXd h(2 * n);
        g.setZero();
        for (int i = 0; i < n; ++i) {
            g(2 * i, i) = 1.0;
            h(2 * i) = hi[i];
            g(2 * i + 1, i) = -1.0;
            h(2 * i + 1) = -lo[i];
        }
        const auto ref = oracle::enumerate_qp(Eigen::MatrixXd::Identity(n, n), -q_unc, g, h, 1e-12);
        REQUIRE(ref);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(r.q[i] - ref->x(i)) < 1e-9);
            CHECK(r.q[i] >= lo[i]);
            CHECK(r.q[i] <= hi[i]);
            CHECK(r.state.lambda_min[i] >= 0.0);
            CHECK(r.state.lambda_max[i] >= 0.0);
        }
    }
}

TEST_CASE("OFO steady state inside the band releases reactive power") {
    OfoState s;
    s.h = Eigen::MatrixXd::Constant(2, 2, 1e-4);
    s.monitored = {1, 2};
    s.lambda_min = {0.0, 0.0};
    s.lambda_max = {0.3, 0.1};
    const std::vector<double> lo{-50.0, -50.0}, hi{50.0, 50.0}, v{1.0, 1.01};
    std::vector<double> q(2, 1.0);
    int steps = 0;
    while ((q[0] != 0.0 || q[1] != 0.0) && steps < 100) {
        ofo_step_inplace(s, v, lo, hi, 0.95, 1.05, q);
        ++steps;
    }
    CHECK(q == std::vector<double>{0.0, 0.0});
    CHECK(steps <= 8);  // duals fall by alpha * 0.04 per step
}

TEST_CASE("OFO state from a sensitivity matrix") {
    const auto net = build_cigre_lv_residential();
    const auto sens = sensitivity(net, Injections::zeros(net.bus_count()));
    const auto s = OfoState::from_sensitivity(sens);
    CHECK(s.h(0, 0) == doctest::Approx(sens.h(0, 0) * 1000.0));
    CHECK(s.lambda_max == std::vector<double>(5, 0.0));
    const auto id = OfoState::from_sensitivity(SensitivityMatrix::identity(net.inverter_buses()));
    CHECK(id.h.isIdentity());
}

TEST_CASE("local controllers only read their own bus") {
    const auto net = build_cigre_lv_residential();
    ControllerSpec droop_spec;
    droop_spec.kind = ControllerKind::droop;
    ControllerSpec ml_spec;
    ml_spec.kind = ControllerKind::mldroop;
    for (const auto& inv : net.inverters) {
        auto c = sample_curve();
        c.inverter_bus = inv.bus;
        c.q_min = inv.q_min_kvar;
        c.q_max = inv.q_max_kvar;
        ml_spec.ml_curves.push_back(c);
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.85, 1.15);
    for (const auto* spec : {&droop_spec, &ml_spec}) {
        auto a = make_controller(net, *spec);
        auto b = make_controller(net, *spec);
        for (int step = 0; step < 50; ++step) {
            std::vector<double> v1(net.bus_count()), v2(net.bus_count());
            for (auto& x : v1) x = u(rng);
            for (auto& x : v2) x = u(rng);
            for (int bus : net.inverter_buses()) v2[bus] = v1[bus];
            const auto qa = a->step({0.0, v1, nullptr});
            const auto qb = b->step({0.0, v2, nullptr});
            CHECK(qa == qb);
        }
    }
}

TEST_CASE("controller factory") {
    const auto net = build_cigre_lv_residential();
    ControllerSpec spec;
    CHECK(make_controller(net, spec)->kind() == ControllerKind::none);
    spec.kind = ControllerKind::mldroop;
    CHECK_THROWS_AS(make_controller(net, spec), InvalidArgument);
    spec.kind = ControllerKind::droop;
    spec.v2 = 0.80;
    CHECK_THROWS_AS(make_controller(net, spec), InvalidArgument);
    CHECK(controller_kind_from("ofo") == ControllerKind::ofo);
    CHECK_THROWS_AS(controller_kind_from("pid"), InvalidArgument);

    spec = {};
    spec.kind = ControllerKind::ofo;
    spec.h_source = HSource::file;
    CHECK_THROWS_AS(make_controller(net, spec), InvalidArgument);
    spec.h_matrix = SensitivityMatrix::identity({1, 2});
    CHECK_THROWS_AS(make_controller(net, spec), InvalidArgument);

    spec.kind = ControllerKind::orpf;
    auto orpf = make_controller(net, spec);
    std::vector<double> v(net.bus_count(), 1.0);
    CHECK_THROWS_AS(orpf->step({0.0, v, nullptr}), InvalidArgument);
}

TEST_CASE("OFO controller reset restores the initial state") {
    const auto net = build_cigre_lv_residential();
    ControllerSpec spec;
    spec.kind = ControllerKind::ofo;
    OfoController c(net, spec);
    std::vector<double> v(net.bus_count(), 1.12);
    const auto first = c.step({0.0, v, nullptr});
    (void)c.step({10.0, v, nullptr});
    c.reset();
    CHECK(c.state().lambda_max == std::vector<double>(5, 0.0));
    CHECK(c.step({0.0, v, nullptr}) == first);
}
