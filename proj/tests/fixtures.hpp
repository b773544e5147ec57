#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles/newton_raphson.hpp"
#include "vvc/grid.hpp"
#include "vvc/power_flow.hpp"

namespace fixture {

/// Slack (bus 0) feeding one load bus over r + jx ohms at 400 V.
inline vvc::Network two_bus(double r_ohm, double x_ohm) {
    vvc::Network n;
    n.buses = {{0, 400.0, vvc::BusKind::slack, 0.0}, {1, 400.0, vvc::BusKind::load, 30.0}};
    n.branches = {{0, 1, r_ohm, x_ohm, vvc::BranchKind::line, std::nullopt}};
    n.inverters = {{1, 30.0, -15.0, 15.0}};
    return n;
}

/// Random tree with up to `max_buses` buses; half of them start with a
/// 20 kV / 400 V transformer. Injections are random loads and generation.
struct RandomCase {
    vvc::Network network;
    vvc::Injections inj;
};

inline RandomCase random_radial(std::mt19937_64& rng, int max_buses = 10) {
    std::uniform_int_distribution<int> size(3, max_buses);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = size(rng);
    const bool trafo = u(rng) < 0.5;

    RandomCase c;
    auto& net = c.network;
    net.s_base_kva = 250.0 + 500.0 * u(rng);
    net.buses.push_back({0, trafo ? 20000.0 : 400.0, vvc::BusKind::slack, 0.0});
    for (int i = 1; i < n; ++i) {
        const bool load = u(rng) < 0.7;
        net.buses.push_back({i, 400.0, load ? vvc::BusKind::load : vvc::BusKind::junction, load ? 20.0 : 0.0});
    }
    for (int i = 1; i < n; ++i) {
        if (i == 1 && trafo) {
            net.branches.push_back(vvc::transformer_branch(0, 1, 400.0 + 400.0 * u(rng), 400.0, 4.0, 1.0));
            continue;
        }
        std::uniform_int_distribution<int> parent(trafo ? 1 : 0, i - 1);
        net.branches.push_back(
            {parent(rng), i, 0.005 + 0.08 * u(rng), 0.002 + 0.03 * u(rng), vvc::BranchKind::line, std::nullopt});
    }
    c.inj = vvc::Injections::zeros(static_cast<std::size_t>(n));
    for (int i = 1; i < n; ++i) {
        if (net.buses[static_cast<std::size_t>(i)].kind != vvc::BusKind::load) continue;
        c.inj.p_kw[static_cast<std::size_t>(i)] = -30.0 + 60.0 * u(rng);
        c.inj.q_kvar[static_cast<std::size_t>(i)] = -10.0 + 20.0 * u(rng);
    }
    return c;
}

/// Feeder with one or two PV inverters that overvolts at zero q but can be
/// brought back inside the band.
inline vvc::Network orpf_case(int inverters, double q_limit = 15.0) {
    vvc::Network n;
    n.v_min = 0.95;
    n.v_max = 1.04;
    n.s_base_kva = 100.0;
    n.buses = {{0, 400.0, vvc::BusKind::slack, 0.0},
               {1, 400.0, vvc::BusKind::junction, 0.0},
               {2, 400.0, vvc::BusKind::load, 10.0}};
    n.branches = {{0, 1, 0.05, 0.04, vvc::BranchKind::line, std::nullopt},
                  {1, 2, 0.08, 0.05, vvc::BranchKind::line, std::nullopt}};
    n.inverters = {{2, 40.0, -q_limit, q_limit}};
    if (inverters == 2) {
        n.buses.push_back({3, 400.0, vvc::BusKind::load, 10.0});
        n.branches.push_back({1, 3, 0.06, 0.06, vvc::BranchKind::line, std::nullopt});
        n.inverters.push_back({3, 40.0, -q_limit, q_limit});
    }
    return n;
}

/// Exhaustive search on a q grid of `resolution` kVAr: smallest 1/2 q'q
/// with every non-slack voltage (Newton-Raphson oracle) inside the band.
struct GridSearchResult {
    std::vector<double> q;
    double objective = std::numeric_limits<double>::infinity();
};

inline GridSearchResult grid_search_orpf(const vvc::Network& net, const vvc::Injections& w, double resolution) {
    GridSearchResult best;
    const auto m = net.inverters.size();
    std::vector<int> steps(m), idx(m, 0);
    for (std::size_t j = 0; j < m; ++j)
        steps[j] = static_cast<int>(std::lround((net.inverters[j].q_max_kvar - net.inverters[j].q_min_kvar) / resolution));
    std::vector<double> q(m);
    for (;;) {
        double f = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            q[j] = net.inverters[j].q_min_kvar + idx[j] * resolution;
            f += 0.5 * q[j] * q[j];
        }
        if (f < best.objective) {
            auto qk = w.q_kvar;
            for (std::size_t j = 0; j < m; ++j) qk[static_cast<std::size_t>(net.inverters[j].bus)] += q[j];
            const auto nr = oracle::newton_raphson(net, w.p_kw, qk, 1e-10);
            bool ok = true;
            for (std::size_t b = 0; b < nr.v_mag.size(); ++b)
                if (static_cast<int>(b) != net.slack_bus() && (nr.v_mag[b] > net.v_max || nr.v_mag[b] < net.v_min))
                    ok = false;
            if (ok) best = {q, f};
        }
        std::size_t j = 0;
        while (j < m && ++idx[j] > steps[j]) idx[j++] = 0;
        if (j == m) break;
    }
    return best;
}

}  // namespace fixture
