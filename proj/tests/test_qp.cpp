#include <doctest.h>

#include <random>

#include "oracles/qp_enumeration.hpp"
#include "vvc/error.hpp"
#include "vvc/qp.hpp"

using namespace vvc;

TEST_CASE("dual ascent matches active-set enumeration on random small QPs") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + trial % 3;
        const Eigen::Index m = 2 + trial % 4;
        Eigen::MatrixXd a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = u(rng);
        QuadraticProgram qp;
        qp.hessian = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
        qp.linear = Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
        qp.ineq = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return u(rng); });
        // x = 0 is strictly feasible, so the program always has a solution.
        qp.ineq_rhs = Eigen::VectorXd::NullaryExpr(m, [&] { return 0.1 + std::abs(u(rng)); });
        qp.eq.resize(0, n);
        qp.eq_rhs.resize(0);

        const auto sol = solve_dual_ascent(qp, {1e-10, 500000});
        REQUIRE(sol.converged);
        const auto ref = oracle::enumerate_qp(qp.hessian, qp.linear, qp.ineq, qp.ineq_rhs);
        REQUIRE(ref);
        CHECK((sol.x - ref->x).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(sol.ineq_multipliers.minCoeff() >= 0.0);
    }
}

TEST_CASE("equality constraints") {
    // min 1/2 |x|^2  s.t. x0 + x1 = 2  ->  x = (1, 1)
    QuadraticProgram qp;
    qp.hessian = Eigen::MatrixXd::Identity(2, 2);
    qp.linear = Eigen::VectorXd::Zero(2);
    qp.ineq.resize(0, 2);
    qp.ineq_rhs.resize(0);
    qp.eq = Eigen::MatrixXd::Ones(1, 2);
    qp.eq_rhs = Eigen::VectorXd::Constant(1, 2.0);
    const auto sol = solve_dual_ascent(qp);
    REQUIRE(sol.converged);
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.x(1) == doctest::Approx(1.0));
}

TEST_CASE("infeasible program is reported, bad input rejected") {
    QuadraticProgram qp;
    qp.hessian = Eigen::MatrixXd::Identity(1, 1);
    qp.linear = Eigen::VectorXd::Zero(1);
    qp.ineq.resize(2, 1);
    qp.ineq << 1.0, -1.0;
    qp.ineq_rhs.resize(2);
    qp.ineq_rhs << -1.0, -1.0;  // x <= -1 and x >= 1
    qp.eq.resize(0, 1);
    qp.eq_rhs.resize(0);
    CHECK_FALSE(solve_dual_ascent(qp, {1e-8, 2000}).converged);

    qp.hessian(0, 0) = -1.0;
    CHECK_THROWS_AS(solve_dual_ascent(qp), InvalidArgument);
    qp.hessian = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(solve_dual_ascent(qp), InvalidArgument);
}

TEST_CASE("box projection") {
    std::vector<double> x{-3.0, 0.25, 9.0};
    project_box(x, std::vector<double>{-1.0, -1.0, -1.0}, std::vector<double>{2.0, 2.0, 2.0});
    CHECK(x == std::vector<double>{-1.0, 0.25, 2.0});
    CHECK_THROWS_AS(project_box(x, std::vector<double>{0.0}, std::vector<double>{1.0}), InvalidArgument);
}
