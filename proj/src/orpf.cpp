#include "vvc/orpf.hpp"

#include <algorithm>
#include <cmath>

#include "vvc/error.hpp"

namespace vvc {
namespace {

struct Linearization {
    Eigen::MatrixXd h;       // rows x inverters, p.u./kVAr
    Eigen::VectorXd offset;  // v(q) ~ offset + h q
};

Injections with_setpoints(const Injections& w, const std::vector<int>& inverter_buses, const Eigen::VectorXd& q) {
    Injections inj = w;
    for (std::size_t j = 0; j < inverter_buses.size(); ++j) inj.q_kvar[inverter_buses[j]] += q(static_cast<Eigen::Index>(j));
    return inj;
}

// Per-row extremes of the linear model over a box; exact row by row.
bool rows_reachable(const Linearization& lin, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, double v_min,
                    double v_max) {
    for (Eigen::Index i = 0; i < lin.h.rows(); ++i) {
        double lowest = lin.offset(i);
        double highest = lin.offset(i);
        for (Eigen::Index j = 0; j < lin.h.cols(); ++j) {
            const double a = lin.h(i, j) * lo(j);
            const double b = lin.h(i, j) * hi(j);
            lowest += std::min(a, b);
            highest += std::max(a, b);
        }
        if (lowest > v_max || highest < v_min) return false;
    }
    return true;
}

void append_box(Eigen::MatrixXd& g, Eigen::VectorXd& rhs, Eigen::Index row, Eigen::Index n, const Eigen::VectorXd& lo,
                const Eigen::VectorXd& hi) {
    for (Eigen::Index j = 0; j < n; ++j) {
        g(row + 2 * j, j) = 1.0;
        rhs(row + 2 * j) = hi(j);
        g(row + 2 * j + 1, j) = -1.0;
        rhs(row + 2 * j + 1) = -lo(j);
    }
}

// min 1/2 q'q  s.t. v_min <= offset + h q <= v_max, lo <= q <= hi
QpSolution min_norm_step(const Linearization& lin, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         double v_min, double v_max, const DualAscentOptions& opts) {
    const Eigen::Index n = lin.h.cols();
    const Eigen::Index m = lin.h.rows();
    QuadraticProgram qp;
    qp.hessian = Eigen::MatrixXd::Identity(n, n);
    qp.linear = Eigen::VectorXd::Zero(n);
    qp.ineq = Eigen::MatrixXd::Zero(2 * m + 2 * n, n);
    qp.ineq_rhs.resize(2 * m + 2 * n);
    qp.ineq.topRows(m) = lin.h;
    qp.ineq_rhs.head(m) = Eigen::VectorXd::Constant(m, v_max) - lin.offset;
    qp.ineq.middleRows(m, m) = -lin.h;
    qp.ineq_rhs.segment(m, m) = lin.offset - Eigen::VectorXd::Constant(m, v_min);
    append_box(qp.ineq, qp.ineq_rhs, 2 * m, n, lo, hi);
    // Voltage rows are in p.u.; scale them to kVAr-like magnitudes so one
    // tolerance fits every row.
    const double scale = 1.0 / std::max(lin.h.cwiseAbs().maxCoeff(), 1e-12);
    qp.ineq.topRows(2 * m) *= scale;
    qp.ineq_rhs.head(2 * m) *= scale;
    return solve_dual_ascent(qp, opts);
}

// min sum(s) + eps/2 (|q|^2 + |s|^2 / row_scale)
// s.t. h q - s_up <= v_max - offset, -h q - s_lo <= offset - v_min, s >= 0, box.
Eigen::VectorXd min_violation_step(const Linearization& lin, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                   double v_min, double v_max, const DualAscentOptions& opts) {
    const Eigen::Index n = lin.h.cols();
    const Eigen::Index m = lin.h.rows();
    const Eigen::Index nv = n + 2 * m;

    double row_norm = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) row_norm = std::max(row_norm, lin.h.row(i).squaredNorm());
    row_norm = std::max(row_norm, 1e-24);
    const double eps_q = 1e-8;
    const double eps_s = eps_q / row_norm;

    QuadraticProgram qp;
    qp.hessian = Eigen::MatrixXd::Zero(nv, nv);
    qp.hessian.diagonal().head(n).setConstant(eps_q);
    qp.hessian.diagonal().tail(2 * m).setConstant(eps_s);
    qp.linear = Eigen::VectorXd::Zero(nv);
    qp.linear.tail(2 * m).setOnes();

    const Eigen::Index rows = 2 * m + 2 * m + 2 * n;
    qp.ineq = Eigen::MatrixXd::Zero(rows, nv);
    qp.ineq_rhs.resize(rows);
    for (Eigen::Index i = 0; i < m; ++i) {
        qp.ineq.row(i).head(n) = lin.h.row(i);
        qp.ineq(i, n + i) = -1.0;
        qp.ineq_rhs(i) = v_max - lin.offset(i);
        qp.ineq.row(m + i).head(n) = -lin.h.row(i);
        qp.ineq(m + i, n + m + i) = -1.0;
        qp.ineq_rhs(m + i) = lin.offset(i) - v_min;
    }
    for (Eigen::Index i = 0; i < 2 * m; ++i) {
        qp.ineq(2 * m + i, n + i) = -1.0;
        qp.ineq_rhs(2 * m + i) = 0.0;
    }
    Eigen::MatrixXd box = Eigen::MatrixXd::Zero(2 * n, n);
    Eigen::VectorXd box_rhs(2 * n);
    append_box(box, box_rhs, 0, n, lo, hi);
    qp.ineq.bottomRows(2 * n).leftCols(n) = box;
    qp.ineq_rhs.tail(2 * n) = box_rhs;

    DualAscentOptions o = opts;
    o.tolerance = std::min(opts.tolerance, 1e-9);
    const auto sol = solve_dual_ascent(qp, o);
    Eigen::VectorXd q = sol.x.head(n);
    for (Eigen::Index j = 0; j < n; ++j) q(j) = std::clamp(q(j), lo(j), hi(j));
    return q;
}

}  // namespace

OrpfResult orpf_solve(const Network& network, const RadialPowerFlow& pf, const Injections& w,
                      std::span<const double> q_lo, std::span<const double> q_hi, double v_min, double v_max,
                      const OrpfOptions& options) {
    const auto buses = network.inverter_buses();
    const auto n = static_cast<Eigen::Index>(buses.size());
    if (q_lo.size() != buses.size() || q_hi.size() != buses.size())
        throw InvalidArgument("orpf_solve: q limits must have one entry per inverter");
    const auto rows = monitored_buses(network, options.monitor);

    const Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(q_lo.data(), n);
    const Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(q_hi.data(), n);
    const Eigen::VectorXd trust = options.trust_fraction * (hi - lo);

    OrpfResult result;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) q(j) = std::clamp(0.0, lo(j), hi(j));

    for (int it = 0; it < options.max_outer; ++it) {
        const Injections inj = with_setpoints(w, buses, q);
        const auto base = pf.solve(inj);
        if (!base.converged) throw NumericalError("orpf_solve: power flow diverged");

        if (it == 0 && q.isZero()) {
            const bool inside = std::all_of(rows.begin(), rows.end(), [&](int b) {
                return base.v_mag[b] >= v_min && base.v_mag[b] <= v_max;
            });
            if (inside) {
                result.q_kvar.assign(q.data(), q.data() + n);
                return result;
            }
        }

        Linearization lin;
        lin.h = sensitivity(network, pf, inj, options.delta_q_kvar, rows).h;
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = base.v_mag[rows[i]];
        lin.offset = v - lin.h * q;

        const Eigen::VectorXd t_lo = lo.cwiseMax(q - trust);
        const Eigen::VectorXd t_hi = hi.cwiseMin(q + trust);

        Eigen::VectorXd next;
        const bool feasible = rows_reachable(lin, lo, hi, v_min, v_max);
        result.status = feasible ? OrpfStatus::optimal : OrpfStatus::infeasible_fallback;
        bool stepped = false;
        if (feasible && rows_reachable(lin, t_lo, t_hi, v_min, v_max)) {
            const auto sol = min_norm_step(lin, t_lo, t_hi, v_min, v_max, options.qp);
            if (sol.converged) {
                next = sol.x.cwiseMax(t_lo).cwiseMin(t_hi);
                stepped = true;
            } else {
                // Rows individually reachable but jointly not.
                result.status = OrpfStatus::infeasible_fallback;
            }
        }
        if (!stepped) next = min_violation_step(lin, t_lo, t_hi, v_min, v_max, options.qp);

        result.iterations = it + 1;
        const double change = (next - q).lpNorm<Eigen::Infinity>();
        q = next;
        if (change < options.q_tolerance_kvar) break;
    }

    result.q_kvar.assign(q.data(), q.data() + n);
    return result;
}

OrpfResult orpf_solve(const Network& network, const Injections& w, std::span<const double> q_lo,
                      std::span<const double> q_hi, double v_min, double v_max, const OrpfOptions& options) {
    const RadialPowerFlow pf(network);
    return orpf_solve(network, pf, w, q_lo, q_hi, v_min, v_max, options);
}

}  // namespace vvc
