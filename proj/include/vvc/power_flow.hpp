#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vvc/grid.hpp"

namespace vvc {

/// Nodal injections, generator convention: positive = power into the grid.
/// Indexed by bus id; slack entries are ignored.
struct Injections {
    std::vector<double> p_kw;
    std::vector<double> q_kvar;

    static Injections zeros(std::size_t bus_count) {
        return Injections{std::vector<double>(bus_count, 0.0), std::vector<double>(bus_count, 0.0)};
    }
    bool operator==(const Injections&) const = default;
};

struct PowerFlowOptions {
    double tolerance = 1e-8;  // max complex power mismatch, p.u.
    int max_iterations = 100;
};

struct PowerFlowSolution {
    std::vector<double> v_mag;  // p.u.
    std::vector<double> v_ang;  // rad
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;  // p.u.
};

/// Backward-forward sweep for radial networks with constant-power buses.
/// Construction precomputes the tree ordering and per-unit impedances, so
/// one instance can serve many solves (and threads: solve() is const).
class RadialPowerFlow {
  public:
    explicit RadialPowerFlow(const Network& network);

    PowerFlowSolution solve(const Injections& inj, const PowerFlowOptions& options = {}) const;

    std::size_t bus_count() const { return parent_.size(); }
    int slack() const { return slack_; }
    double s_base_kva() const { return s_base_kva_; }
    /// Parent bus of every bus (-1 for the slack).
    const std::vector<int>& parents() const { return parent_; }
    /// Buses ordered root first, every parent before its children.
    const std::vector<int>& order() const { return order_; }
    /// Series impedance of the branch feeding each bus, p.u.
    const std::vector<std::complex<double>>& branch_impedance() const { return z_; }

  private:
    int slack_ = 0;
    double s_base_kva_ = 1.0;
    std::vector<int> parent_;
    std::vector<int> order_;
    std::vector<std::complex<double>> z_;
};

/// Convenience one-shot solve. Throws InvalidArgument for non-radial input.
PowerFlowSolution solve(const Network& network, const Injections& inj, const PowerFlowOptions& options = {});

enum class MonitoredBuses { inverter_buses, all_buses };

/// dv/dq, rows = monitored buses, columns = inverters, in p.u. per kVAr.
struct SensitivityMatrix {
    Eigen::MatrixXd h;
    std::vector<int> row_buses;
    std::vector<int> col_buses;
    std::string operating_point = "no-load";

    static SensitivityMatrix identity(const std::vector<int>& inverter_buses);
};

/// Rows of the monitored set for the given mode (all non-slack buses or
/// the inverter buses).
std::vector<int> monitored_buses(const Network& network, MonitoredBuses mode);

/// Forward finite differences around `inj`: column j = (v(q + dq e_j) - v(q)) / dq.
/// Throws NumericalError naming the inverter when a perturbed solve diverges.
SensitivityMatrix sensitivity(const Network& network, const Injections& inj, double delta_q_kvar = 1.0,
                              MonitoredBuses mode = MonitoredBuses::inverter_buses);
SensitivityMatrix sensitivity(const Network& network, const RadialPowerFlow& pf, const Injections& inj,
                              double delta_q_kvar, const std::vector<int>& rows);

}  // namespace vvc
