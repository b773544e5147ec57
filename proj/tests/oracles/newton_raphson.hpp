#pragma once

// Full polar Newton-Raphson power flow on a dense bus admittance matrix.
// Shares nothing with the library's sweep solver beyond the input data.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vvc/grid.hpp"

namespace oracle {

struct NrResult {
    std::vector<double> v_mag;
    std::vector<double> v_ang;
    int iterations = 0;
};

inline NrResult newton_raphson(const vvc::Network& net, const std::vector<double>& p_kw,
                               const std::vector<double>& q_kvar, double tol = 1e-12, int max_iter = 50) {
    using cd = std::complex<double>;
    const auto n = static_cast<Eigen::Index>(net.buses.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : net.branches) {
        const double v_base = net.buses[static_cast<std::size_t>(br.to_bus)].nominal_v;
        const double z_base = v_base * v_base / (net.s_base_kva * 1e3);
        const cd yb = 1.0 / cd(br.r_ohm / z_base, br.x_ohm / z_base);
        y(br.from_bus, br.from_bus) += yb;
        y(br.to_bus, br.to_bus) += yb;
        y(br.from_bus, br.to_bus) -= yb;
        y(br.to_bus, br.from_bus) -= yb;
    }
    const int slack = net.slack_bus();
    std::vector<Eigen::Index> pq;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != slack) pq.push_back(i);
    const auto m = static_cast<Eigen::Index>(pq.size());

    Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd va = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p_spec(n), q_spec(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p_spec(i) = p_kw[static_cast<std::size_t>(i)] / net.s_base_kva;
        q_spec(i) = q_kvar[static_cast<std::size_t>(i)] / net.s_base_kva;
    }

    NrResult r;
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(vm(i), va(i));
        const Eigen::VectorXcd s = v.cwiseProduct((y * v).conjugate());
        Eigen::VectorXd f(2 * m);
        for (Eigen::Index k = 0; k < m; ++k) {
            f(k) = s(pq[k]).real() - p_spec(pq[k]);
            f(m + k) = s(pq[k]).imag() - q_spec(pq[k]);
        }
        if (f.cwiseAbs().maxCoeff() < tol) break;

        // Jacobian with respect to (angles, magnitudes) of the PQ buses.
        Eigen::MatrixXd jac(2 * m, 2 * m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto i = pq[a];
            for (Eigen::Index b = 0; b < m; ++b) {
                const auto k = pq[b];
                if (i != k) {
                    const double g = y(i, k).real(), bb = y(i, k).imag();
                    const double th = va(i) - va(k);
                    jac(a, b) = vm(i) * vm(k) * (g * std::sin(th) - bb * std::cos(th));
                    jac(a, m + b) = vm(i) * (g * std::cos(th) + bb * std::sin(th));
                    jac(m + a, b) = -vm(i) * vm(k) * (g * std::cos(th) + bb * std::sin(th));
                    jac(m + a, m + b) = vm(i) * (g * std::sin(th) - bb * std::cos(th));
                } else {
                    const double g = y(i, i).real(), bb = y(i, i).imag();
                    const double p = s(i).real(), q = s(i).imag();
                    jac(a, b) = -q - bb * vm(i) * vm(i);
                    jac(a, m + b) = p / vm(i) + g * vm(i);
                    jac(m + a, b) = p - g * vm(i) * vm(i);
                    jac(m + a, m + b) = q / vm(i) - bb * vm(i);
                }
            }
        }
        const Eigen::VectorXd dx = jac.fullPivLu().solve(-f);
        for (Eigen::Index a = 0; a < m; ++a) {
            va(pq[a]) += dx(a);
            vm(pq[a]) += dx(m + a);
        }
    }
    if (r.iterations >= max_iter) throw std::runtime_error("newton-raphson oracle did not converge");
    r.v_mag.assign(vm.data(), vm.data() + n);
    r.v_ang.assign(va.data(), va.data() + n);
    return r;
}

/// Slack at 1 p.u. feeding one load bus through z = r + jx (p.u.); the load
/// absorbs s = p + jq (p.u.). Returns |V| from
///   |V|^4 + (2(rp + xq) - 1)|V|^2 + |z|^2 |s|^2 = 0  (high-voltage root).
inline double two_bus_voltage(double r, double x, double p, double q) {
    const double b = 1.0 - 2.0 * (r * p + x * q);
    const double c = (r * r + x * x) * (p * p + q * q);
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) throw std::runtime_error("two-bus load beyond the nose point");
    return std::sqrt((b + std::sqrt(disc)) / 2.0);
}

}  // namespace oracle
