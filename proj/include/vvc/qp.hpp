#pragma once

#include <span>

#include <Eigen/Dense>

namespace vvc {

/// minimize   1/2 x' P x + c' x
/// subject to G x <= h,  A x = b
/// P must be symmetric positive definite.
struct QuadraticProgram {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd linear;
    Eigen::MatrixXd ineq;
    Eigen::VectorXd ineq_rhs;
    Eigen::MatrixXd eq;
    Eigen::VectorXd eq_rhs;

    Eigen::Index size() const { return hessian.rows(); }
};

struct DualAscentOptions {
    double tolerance = 1e-6;  // primal feasibility and step size
    int max_sweeps = 200000;
};

struct QpSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd ineq_multipliers;
    Eigen::VectorXd eq_multipliers;
    bool converged = false;
    int sweeps = 0;
    double max_violation = 0.0;
};

/// Dual coordinate ascent (Hildreth). Each sweep maximizes the dual exactly
/// along one multiplier at a time, projecting inequality multipliers onto
/// the nonnegative orthant. Infeasible programs show up as converged = false.
QpSolution solve_dual_ascent(const QuadraticProgram& qp, const DualAscentOptions& options = {});

/// Euclidean projection of x onto [lo, hi] (per-coordinate clamp).
void project_box(std::span<double> x, std::span<const double> lo, std::span<const double> hi);

}  // namespace vvc
