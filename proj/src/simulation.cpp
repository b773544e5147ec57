#include "vvc/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "vvc/error.hpp"

namespace vvc {

Network scenario_network(const Network& network, double scenario_factor, std::optional<double> v_min,
                         std::optional<double> v_max) {
    Network n = scale_pv(network, scenario_factor);
    if (v_min) n.v_min = *v_min;
    if (v_max) n.v_max = *v_max;
    if (!(n.v_min < 1.0 && 1.0 < n.v_max)) throw InvalidArgument("voltage limits must satisfy v_min < 1 < v_max");
    return n;
}

Injections uncontrolled_injections(const Network& network, const ProfileSet& profiles, std::size_t t,
                                   double load_power_factor) {
    if (!(load_power_factor > 0.0 && load_power_factor <= 1.0))
        throw InvalidArgument("load power factor must lie in (0, 1]");
    const double q_per_p = std::tan(std::acos(load_power_factor));
    auto inj = Injections::zeros(network.bus_count());
    for (std::size_t k = 0; k < profiles.buses.size(); ++k) {
        const int bus = profiles.buses[k];
        if (bus < 0 || static_cast<std::size_t>(bus) >= network.bus_count() ||
            network.buses[static_cast<std::size_t>(bus)].kind != BusKind::load)
            throw InvalidArgument("profile column for bus " + std::to_string(bus) + " which is not a load bus");
        const double load = profiles.p_load_kw[k][t];
        inj.p_kw[static_cast<std::size_t>(bus)] = profiles.p_pv_kw[k][t] - load;
        inj.q_kvar[static_cast<std::size_t>(bus)] = -load * q_per_p;
    }
    return inj;
}

namespace {

void add_setpoints(Injections& inj, const Injections& w, const std::vector<int>& inverter_buses,
                   const std::vector<double>& q) {
    inj.q_kvar = w.q_kvar;
    for (std::size_t j = 0; j < inverter_buses.size(); ++j)
        inj.q_kvar[static_cast<std::size_t>(inverter_buses[j])] += q[j];
}

}  // namespace

SimulationResult run_timeseries(const Network& base, const ProfileSet& profiles_in, const SimulationConfig& config) {
    if (config.controller_step_s <= 0 || config.profile_step_s <= 0 ||
        config.profile_step_s % config.controller_step_s != 0)
        throw InvalidArgument("controller_step must be positive and divide profile_step");
    if (!(config.scenario_factor > 0.0)) throw InvalidArgument("scenario factor must be positive");
    if (profiles_in.size() == 0) throw InvalidArgument("empty profile set");
    if (profiles_in.size() > 1 && profiles_in.step() != config.profile_step_s)
        throw InvalidArgument("profiles are sampled every " + std::to_string(profiles_in.step()) +
                              " s but profile_step is " + std::to_string(config.profile_step_s) + " s");

    const Network network = scenario_network(base, config.scenario_factor, config.v_min, config.v_max);
    const ProfileSet profiles = apply_scenario(profiles_in, config.scenario_factor);
    const RadialPowerFlow pf(network);
    auto controller = make_controller(network, config.controller);

    const auto inverter_buses = network.inverter_buses();
    const auto substeps = static_cast<std::size_t>(config.profile_step_s / config.controller_step_s);
    const std::size_t records = profiles.size() * substeps;

    SimulationResult r;
    r.controller = config.controller.kind;
    r.controller_step_s = config.controller_step_s;
    r.inverter_buses = inverter_buses;
    for (const auto& b : network.buses)
        if (b.id != network.slack_bus()) r.buses.push_back(b.id);
    r.timestamps.reserve(records);
    r.v_pu.reserve(records * r.buses.size());
    r.q_kvar.reserve(records * inverter_buses.size());
    r.p_total_kw.reserve(records);
    r.q_total_kvar.reserve(records);

    std::vector<double> q(inverter_buses.size(), 0.0);
    Injections inj;
    auto solve_or_throw = [&](std::int64_t ts) {
        auto sol = pf.solve(inj, config.power_flow);
        if (!sol.converged)
            throw NumericalError("power flow diverged at timestamp " + std::to_string(ts) + " (mismatch " +
                                 std::to_string(sol.max_mismatch) + " p.u.)");
        return sol;
    };

    for (std::size_t t = 0; t < profiles.size(); ++t) {
        const Injections w = uncontrolled_injections(network, profiles, t, config.load_power_factor);
        const std::int64_t t0 = profiles.timestamps[t];
        double p_total = 0.0;
        for (std::size_t b = 0; b < w.p_kw.size(); ++b)
            if (static_cast<int>(b) != network.slack_bus()) p_total += w.p_kw[b];

        inj.p_kw = w.p_kw;
        add_setpoints(inj, w, inverter_buses, q);
        auto sol = solve_or_throw(t0);

        for (std::size_t k = 0; k < substeps; ++k) {
            const std::int64_t ts = t0 + static_cast<std::int64_t>(k) * config.controller_step_s;
            const Measurement m{static_cast<double>(ts), sol.v_mag, &w};
            q = controller->step(m);
            add_setpoints(inj, w, inverter_buses, q);
            sol = solve_or_throw(ts);

            r.timestamps.push_back(ts);
            for (int b : r.buses) r.v_pu.push_back(sol.v_mag[static_cast<std::size_t>(b)]);
            r.q_kvar.insert(r.q_kvar.end(), q.begin(), q.end());
            r.p_total_kw.push_back(p_total);
            double q_total = 0.0;
            for (double x : q) q_total += x;
            r.q_total_kvar.push_back(q_total);
        }
    }
    r.metrics = compute(r, network.v_min, network.v_max);
    return r;
}

CapacityResult capacity_sweep(const Network& base, const ControllerSpec& spec, const CapacitySweep& sweep,
                              const CapacityOptions& options) {
    if (!(sweep.p_step_kw > 0.0)) throw InvalidArgument("sweep: p_step must be positive");
    if (!(sweep.p_start_kw < sweep.p_end_kw)) throw InvalidArgument("sweep: p_start must be below p_end");
    if (options.max_substeps < 1) throw InvalidArgument("sweep: max_substeps must be positive");

    const Network network = scenario_network(base, options.scenario_factor, options.v_min, options.v_max);
    const RadialPowerFlow pf(network);
    auto controller = make_controller(network, spec);
    const auto inverter_buses = network.inverter_buses();
    std::vector<int> load_buses;
    for (const auto& b : network.buses)
        if (b.kind == BusKind::load) load_buses.push_back(b.id);

    CapacityResult result;
    result.controller = spec.kind;
    result.v_max_pu = network.v_max;

    const auto levels =
        static_cast<std::size_t>(std::floor((sweep.p_end_kw - sweep.p_start_kw) / sweep.p_step_kw + 1e-9)) + 1;
    for (std::size_t i = 0; i < levels; ++i) {
        CapacityLevel level;
        level.p_per_bus_kw = sweep.p_start_kw + static_cast<double>(i) * sweep.p_step_kw;
        level.p_total_kw = level.p_per_bus_kw * static_cast<double>(load_buses.size());

        const auto w = [&] {
            auto inj = Injections::zeros(network.bus_count());
            for (int b : load_buses) inj.p_kw[static_cast<std::size_t>(b)] = level.p_per_bus_kw;
            return inj;
        }();
        controller->reset();
        std::vector<double> q(inverter_buses.size(), 0.0);
        Injections inj = w;
        auto sol = pf.solve(inj, options.power_flow);
        for (int s = 1; s <= options.max_substeps && sol.converged; ++s) {
            const Measurement m{static_cast<double>(s), sol.v_mag, &w};
            const auto& q_new = controller->step(m);
            double change = 0.0;
            for (std::size_t j = 0; j < q.size(); ++j) change = std::max(change, std::abs(q_new[j] - q[j]));
            q = q_new;
            add_setpoints(inj, w, inverter_buses, q);
            sol = pf.solve(inj, options.power_flow);
            level.substeps = s;
            if (std::max(change, controller->internal_drift_kvar()) < options.steady_tolerance_kvar) {
                level.steady = sol.converged;
                break;
            }
        }
        if (!sol.converged)
            throw NumericalError("power flow diverged at sweep level " + std::to_string(level.p_total_kw) + " kW");
        level.max_v_pu = *std::max_element(sol.v_mag.begin(), sol.v_mag.end());
        if (level.steady && level.max_v_pu <= network.v_max + options.voltage_tolerance_pu)
            result.capacity_kw = level.p_total_kw;
        result.levels.push_back(level);
    }
    return result;
}

}  // namespace vvc
