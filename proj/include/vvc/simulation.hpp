#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vvc/controller.hpp"
#include "vvc/metrics.hpp"
#include "vvc/profiles.hpp"

namespace vvc {

struct SimulationConfig {
    std::int64_t profile_step_s = 60;
    std::int64_t controller_step_s = 10;
    double scenario_factor = 1.0;  // scales PV profiles and inverter ratings
    ControllerSpec controller;
    std::optional<double> v_min;  // default: the network's limits
    std::optional<double> v_max;
    double load_power_factor = 0.95;  // lagging
    PowerFlowOptions power_flow;
};

/// One row per controller sub-step. Voltages cover the LV buses (every bus
/// except the slack); flat blocks are row-major.
struct SimulationResult {
    ControllerKind controller = ControllerKind::none;
    std::int64_t controller_step_s = 10;
    std::vector<int> buses;
    std::vector<int> inverter_buses;
    std::vector<std::int64_t> timestamps;
    std::vector<double> v_pu;    // records x buses
    std::vector<double> q_kvar;  // records x inverters
    std::vector<double> p_total_kw;  // net active injection of all buses
    std::vector<double> q_total_kvar;  // summed inverter setpoints
    MetricsReport metrics;

    std::size_t size() const { return timestamps.size(); }
    std::span<const double> voltages(std::size_t record) const {
        return std::span<const double>(v_pu).subspan(record * buses.size(), buses.size());
    }
    std::span<const double> setpoints(std::size_t record) const {
        return std::span<const double>(q_kvar).subspan(record * inverter_buses.size(), inverter_buses.size());
    }
};

/// Uncontrolled injections w at profile sample `t`: PV minus load on each
/// profiled bus, loads drawing reactive power at `load_power_factor`.
/// Throws InvalidArgument if a profiled bus is not a load bus.
Injections uncontrolled_injections(const Network& network, const ProfileSet& profiles, std::size_t t,
                                   double load_power_factor = 0.95);

/// Quasi-static run. Every profile sample is held for profile_step and the
/// controller runs profile_step / controller_step times on it; each sub-step
/// is (controller update from the latest voltages, power flow with the new
/// setpoints). Throws InvalidArgument for inconsistent config/profiles and
/// NumericalError naming the timestamp when a power flow diverges.
SimulationResult run_timeseries(const Network& network, const ProfileSet& profiles, const SimulationConfig& config);

struct CapacitySweep {
    double p_start_kw = 60.0;  // per load bus
    double p_end_kw = 130.0;
    double p_step_kw = 0.2;
};

struct CapacityOptions {
    double scenario_factor = 2.0;  // inverter fleet used for the sweep
    double steady_tolerance_kvar = 1e-4;
    int max_substeps = 600;
    double voltage_tolerance_pu = 1e-6;
    std::optional<double> v_min;
    std::optional<double> v_max;
    PowerFlowOptions power_flow;
};

struct CapacityLevel {
    double p_per_bus_kw = 0.0;
    double p_total_kw = 0.0;
    double max_v_pu = 0.0;
    int substeps = 0;
    bool steady = false;  // false: no steady state within the limit, excluded
};

struct CapacityResult {
    ControllerKind controller = ControllerKind::none;
    std::vector<CapacityLevel> levels;
    double v_max_pu = 0.0;
    std::optional<double> capacity_kw;  // total infeed of the largest feasible level
};

/// Equal PV at every load bus, zero load, controller reset per level and
/// iterated to steady state. Throws InvalidArgument for a bad sweep range.
CapacityResult capacity_sweep(const Network& network, const ControllerSpec& controller, const CapacitySweep& sweep,
                              const CapacityOptions& options = {});

/// Network with the run's scenario factor and voltage-limit overrides applied.
Network scenario_network(const Network& network, double scenario_factor, std::optional<double> v_min,
                         std::optional<double> v_max);

}  // namespace vvc
