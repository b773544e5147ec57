#include "vvc/power_flow.hpp"

#include <algorithm>
#include <cmath>

#include "vvc/error.hpp"

namespace vvc {

RadialPowerFlow::RadialPowerFlow(const Network& network) {
    const auto issues = validate(network);
    if (!issues.empty()) throw InvalidArgument("power flow needs a valid radial network: " + issues.front());

    const auto n = network.buses.size();
    slack_ = network.slack_bus();
    s_base_kva_ = network.s_base_kva;
    parent_.assign(n, -1);
    z_.assign(n, {0.0, 0.0});

    std::vector<std::vector<std::pair<int, std::complex<double>>>> adj(n);
    for (const auto& br : network.branches) {
        // Impedance base from the to-bus side (transformers are referred there).
        const double v_base = network.buses[br.to_bus].nominal_v;
        const double z_base = v_base * v_base / (network.s_base_kva * 1e3);
        const std::complex<double> z{br.r_ohm / z_base, br.x_ohm / z_base};
        adj[br.from_bus].emplace_back(br.to_bus, z);
        adj[br.to_bus].emplace_back(br.from_bus, z);
    }

    order_.reserve(n);
    order_.push_back(slack_);
    std::vector<char> visited(n, 0);
    visited[slack_] = 1;
    for (std::size_t head = 0; head < order_.size(); ++head) {
        const int b = order_[head];
        for (const auto& [c, z] : adj[b]) {
            if (visited[c]) continue;
            visited[c] = 1;
            parent_[c] = b;
            z_[c] = z;
            order_.push_back(c);
        }
    }
}

PowerFlowSolution RadialPowerFlow::solve(const Injections& inj, const PowerFlowOptions& options) const {
    using cd = std::complex<double>;
    const auto n = parent_.size();
    if (inj.p_kw.size() != n || inj.q_kvar.size() != n)
        throw InvalidArgument("injection vectors must have one entry per bus");

    std::vector<cd> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = cd{inj.p_kw[i], inj.q_kvar[i]} / s_base_kva_;
    s[slack_] = 0.0;

    std::vector<cd> v(n, cd{1.0, 0.0});
    std::vector<cd> j(n);  // current from each bus towards its parent
    std::vector<cd> i_net(n);

    PowerFlowSolution sol;
    sol.iterations = 0;
    for (;;) {
        // Mismatch at the current iterate: S_calc = V conj(I_net) with the
        // net injection current recovered from branch currents.
        for (std::size_t k = 1; k < n; ++k) {
            const int b = order_[k];
            j[b] = (v[b] - v[parent_[b]]) / z_[b];
        }
        i_net = j;
        for (std::size_t k = n - 1; k >= 1; --k) {
            const int b = order_[k];
            if (parent_[b] != slack_) i_net[parent_[b]] -= j[b];
        }
        double mismatch = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            const int b = order_[k];
            mismatch = std::max(mismatch, std::abs(v[b] * std::conj(i_net[b]) - s[b]));
        }
        sol.max_mismatch = mismatch;
        if (!std::isfinite(mismatch)) break;
        if (mismatch < options.tolerance) {
            sol.converged = true;
            break;
        }
        if (sol.iterations >= options.max_iterations) break;
        ++sol.iterations;

        // Backward: accumulate injection currents up the tree.
        for (std::size_t k = 1; k < n; ++k) {
            const int b = order_[k];
            j[b] = std::conj(s[b] / v[b]);
        }
        for (std::size_t k = n - 1; k >= 1; --k) {
            const int b = order_[k];
            if (parent_[b] != slack_) j[parent_[b]] += j[b];
        }
        // Forward: voltage rises along each branch by z * (subtree injection).
        for (std::size_t k = 1; k < n; ++k) {
            const int b = order_[k];
            v[b] = v[parent_[b]] + z_[b] * j[b];
        }
    }

    sol.v_mag.resize(n);
    sol.v_ang.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.v_mag[i] = std::abs(v[i]);
        sol.v_ang[i] = std::arg(v[i]);
    }
    return sol;
}

PowerFlowSolution solve(const Network& network, const Injections& inj, const PowerFlowOptions& options) {
    return RadialPowerFlow(network).solve(inj, options);
}

SensitivityMatrix SensitivityMatrix::identity(const std::vector<int>& inverter_buses) {
    SensitivityMatrix m;
    const auto k = static_cast<Eigen::Index>(inverter_buses.size());
    m.h = Eigen::MatrixXd::Identity(k, k);
    m.row_buses = inverter_buses;
    m.col_buses = inverter_buses;
    m.operating_point = "identity";
    return m;
}

std::vector<int> monitored_buses(const Network& network, MonitoredBuses mode) {
    if (mode == MonitoredBuses::inverter_buses) return network.inverter_buses();
    std::vector<int> rows;
    for (const auto& b : network.buses)
        if (b.kind != BusKind::slack) rows.push_back(b.id);
    return rows;
}

SensitivityMatrix sensitivity(const Network& network, const RadialPowerFlow& pf, const Injections& inj,
                              double delta_q_kvar, const std::vector<int>& rows) {
    if (!(delta_q_kvar > 0.0)) throw InvalidArgument("sensitivity: delta_q must be positive");
    const auto base = pf.solve(inj);
    if (!base.converged) throw NumericalError("sensitivity: power flow at the operating point diverged");

    SensitivityMatrix m;
    m.row_buses = rows;
    m.col_buses = network.inverter_buses();
    m.h.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.col_buses.size()));

    Injections perturbed = inj;
    for (std::size_t c = 0; c < m.col_buses.size(); ++c) {
        const int bus = m.col_buses[c];
        const double saved = perturbed.q_kvar[bus];
        perturbed.q_kvar[bus] = saved + delta_q_kvar;
        const auto sol = pf.solve(perturbed);
        perturbed.q_kvar[bus] = saved;
        if (!sol.converged)
            throw NumericalError("sensitivity: perturbed power flow diverged for inverter at bus " +
                                 std::to_string(bus));
        for (std::size_t r = 0; r < rows.size(); ++r)
            m.h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                (sol.v_mag[rows[r]] - base.v_mag[rows[r]]) / delta_q_kvar;
    }
    return m;
}

SensitivityMatrix sensitivity(const Network& network, const Injections& inj, double delta_q_kvar,
                              MonitoredBuses mode) {
    const RadialPowerFlow pf(network);
    return sensitivity(network, pf, inj, delta_q_kvar, monitored_buses(network, mode));
}

}  // namespace vvc
