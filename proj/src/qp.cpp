#include "vvc/qp.hpp"

#include <algorithm>
#include <cmath>

#include "vvc/error.hpp"
#include "vvc/kernels.hpp"

namespace vvc {

QpSolution solve_dual_ascent(const QuadraticProgram& qp, const DualAscentOptions& options) {
    const Eigen::Index n = qp.size();
    const Eigen::Index mi = qp.ineq.rows();
    const Eigen::Index me = qp.eq.rows();
    if (qp.hessian.cols() != n || qp.linear.size() != n || (mi && qp.ineq.cols() != n) ||
        qp.ineq_rhs.size() != mi || (me && qp.eq.cols() != n) || qp.eq_rhs.size() != me)
        throw InvalidArgument("quadratic program: inconsistent dimensions");

    const Eigen::LLT<Eigen::MatrixXd> llt(qp.hessian);
    if (llt.info() != Eigen::Success) throw InvalidArgument("quadratic program: Hessian is not positive definite");

    const Eigen::Index m = mi + me;
    Eigen::MatrixXd c(m, n);
    Eigen::VectorXd rhs(m);
    if (mi) {
        c.topRows(mi) = qp.ineq;
        rhs.head(mi) = qp.ineq_rhs;
    }
    if (me) {
        c.bottomRows(me) = qp.eq;
        rhs.tail(me) = qp.eq_rhs;
    }

    // x(mu) = x0 - W mu with W = P^-1 C'
    const Eigen::VectorXd x0 = -llt.solve(qp.linear);
    const Eigen::MatrixXd w = llt.solve(c.transpose());
    Eigen::VectorXd diag(m);
    Eigen::VectorXd w_norm(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        diag(i) = c.row(i).dot(w.col(i));
        w_norm(i) = w.col(i).lpNorm<Eigen::Infinity>();
    }

    QpSolution sol;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd x = x0;

    auto max_violation = [&] {
        double viol = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double r = c.row(i).dot(x) - rhs(i);
            viol = std::max(viol, i < mi ? r : std::fabs(r));
        }
        return viol;
    };

    sol.max_violation = max_violation();
    if (sol.max_violation <= options.tolerance) {
        sol.converged = true;
    } else {
        for (sol.sweeps = 1; sol.sweeps <= options.max_sweeps; ++sol.sweeps) {
            double max_step = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (diag(i) <= 0.0) continue;  // zero row
                const double r = c.row(i).dot(x) - rhs(i);
                double next = mu(i) + r / diag(i);
                if (i < mi) next = std::max(0.0, next);
                const double delta = next - mu(i);
                if (delta == 0.0) continue;
                mu(i) = next;
                x.noalias() -= w.col(i) * delta;
                max_step = std::max(max_step, std::fabs(delta) * w_norm(i));
            }
            if (max_step <= options.tolerance * 1e-3) {
                sol.max_violation = max_violation();
                if (sol.max_violation <= options.tolerance) {
                    sol.converged = true;
                    break;
                }
                if (max_step == 0.0) break;
            }
        }
        sol.max_violation = max_violation();
        sol.sweeps = std::min(sol.sweeps, options.max_sweeps);
    }

    sol.x = x;
    sol.ineq_multipliers = mu.head(mi);
    sol.eq_multipliers = mu.tail(me);
    return sol;
}

void project_box(std::span<double> x, std::span<const double> lo, std::span<const double> hi) {
    if (lo.size() != x.size() || hi.size() != x.size()) throw InvalidArgument("project_box: dimension mismatch");
    kernels::active().clamp(x, lo, hi);
}

}  // namespace vvc
