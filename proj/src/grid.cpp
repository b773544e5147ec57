#include "vvc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vvc/error.hpp"

namespace vvc {

int Network::slack_bus() const {
    for (const auto& b : buses)
        if (b.kind == BusKind::slack) return b.id;
    throw InvalidArgument("network has no slack bus");
}

std::vector<int> Network::inverter_buses() const {
    std::vector<int> out;
    out.reserve(inverters.size());
    for (const auto& inv : inverters) out.push_back(inv.bus);
    return out;
}

std::vector<double> Network::q_min_kvar() const {
    std::vector<double> out;
    for (const auto& inv : inverters) out.push_back(inv.q_min_kvar);
    return out;
}

std::vector<double> Network::q_max_kvar() const {
    std::vector<double> out;
    for (const auto& inv : inverters) out.push_back(inv.q_max_kvar);
    return out;
}

Branch transformer_branch(int from_bus, int to_bus, double rating_kva, double v_lv_volts,
                          double vk_percent, double vkr_percent) {
    if (!(rating_kva > 0.0) || !(v_lv_volts > 0.0) || !(vkr_percent >= 0.0) || !(vk_percent > vkr_percent))
        throw InvalidArgument("transformer_branch: need rating > 0, voltage > 0 and vk > vkr >= 0");
    const double z_base = v_lv_volts * v_lv_volts / (rating_kva * 1e3);
    const double z = vk_percent / 100.0 * z_base;
    const double r = vkr_percent / 100.0 * z_base;
    return Branch{from_bus, to_bus, r, std::sqrt(z * z - r * r), BranchKind::transformer, rating_kva};
}

namespace {

// CIGRE Task Force C6.04.02 (2014), "Benchmark Systems for Network
// Integration of Renewable and Distributed Energy Resources", European LV
// network, residential subnetwork. Same constants as pandapower's
// create_cigre_network_lv.
struct CableType {
    double r_ohm_per_km;
    double x_ohm_per_km;
};
constexpr CableType kUG1{0.162, 0.0832};
constexpr CableType kUG3{0.822, 0.0847};

struct LineSpec {
    int from;
    int to;
    double length_km;
    CableType cable;
};

constexpr LineSpec kResidentialLines[] = {
    {1, 2, 0.035, kUG1},   {2, 3, 0.035, kUG1},   {3, 4, 0.035, kUG1},   {4, 5, 0.035, kUG1},
    {5, 6, 0.035, kUG1},   {6, 7, 0.035, kUG1},   {7, 8, 0.035, kUG1},   {8, 9, 0.035, kUG1},
    {9, 10, 0.035, kUG1},  {3, 11, 0.030, kUG3},  {4, 12, 0.035, kUG3},  {12, 13, 0.035, kUG3},
    {13, 14, 0.035, kUG3}, {14, 15, 0.030, kUG3}, {6, 16, 0.030, kUG3},  {9, 17, 0.030, kUG3},
    {10, 18, 0.030, kUG3},
};

struct LoadSpec {
    int bus;
    double rated_kva;
};

// Rated apparent power of the aggregated residential loads (pf 0.95).
constexpr LoadSpec kResidentialLoads[] = {{11, 15.0}, {15, 52.0}, {16, 55.0}, {17, 35.0}, {18, 47.0}};

}  // namespace

Network build_cigre_lv_residential(const CigreOptions& options) {
    Network net;
    net.f_nominal_hz = 50.0;
    net.v_min = options.v_min;
    net.v_max = options.v_max;
    net.s_base_kva = 500.0;

    net.buses.push_back(Bus{0, 20e3, BusKind::slack, 0.0});
    for (int id = 1; id <= 18; ++id) net.buses.push_back(Bus{id, 400.0, BusKind::junction, 0.0});
    for (const auto& load : kResidentialLoads) {
        net.buses[load.bus].kind = BusKind::load;
        net.buses[load.bus].nominal_load_kw = load.rated_kva;
    }

    net.branches.push_back(transformer_branch(0, 1, 500.0, 400.0, 4.123106, 1.0));
    for (const auto& l : kResidentialLines) {
        net.branches.push_back(Branch{l.from, l.to, l.cable.r_ohm_per_km * l.length_km,
                                      l.cable.x_ohm_per_km * l.length_km, BranchKind::line,
                                      std::nullopt});
    }

    for (const auto& load : kResidentialLoads) {
        const double q = options.q_per_p_peak * load.rated_kva;
        net.inverters.push_back(Inverter{load.bus, load.rated_kva, -q, q});
    }
    return net;
}

Network scale_pv(const Network& network, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor))
        throw InvalidArgument("scale_pv: factor must be positive, got " + std::to_string(factor));
    Network out = network;
    for (auto& inv : out.inverters) {
        inv.p_peak_kw *= factor;
        inv.q_min_kvar *= factor;
        inv.q_max_kvar *= factor;
    }
    return out;
}

std::vector<std::string> validate(const Network& network) {
    std::vector<std::string> issues;
    const auto n = network.buses.size();

    if (n == 0) {
        issues.emplace_back("network has no buses");
        return issues;
    }

    std::vector<int> seen(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& b = network.buses[i];
        if (b.id < 0 || static_cast<std::size_t>(b.id) >= n)
            issues.push_back("bus " + std::to_string(b.id) + ": id out of range 0.." + std::to_string(n - 1));
        else if (seen[b.id]++)
            issues.push_back("bus " + std::to_string(b.id) + ": duplicate id");
        if (static_cast<std::size_t>(b.id) != i)
            issues.push_back("bus " + std::to_string(b.id) + ": ids must be contiguous and in order (position " +
                             std::to_string(i) + ")");
        if (!(b.nominal_v > 0.0)) issues.push_back("bus " + std::to_string(b.id) + ": nominal voltage must be positive");
    }
    const auto slack_count = std::count_if(network.buses.begin(), network.buses.end(),
                                           [](const Bus& b) { return b.kind == BusKind::slack; });
    if (slack_count != 1) issues.push_back("expected exactly one slack bus, found " + std::to_string(slack_count));

    auto bus_ok = [&](int id) { return id >= 0 && static_cast<std::size_t>(id) < n; };

    // Union-find for connectivity / cycle detection.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    bool cyclic = false;
    for (std::size_t k = 0; k < network.branches.size(); ++k) {
        const auto& br = network.branches[k];
        const std::string tag = "branch " + std::to_string(k) + " (" + std::to_string(br.from_bus) + "-" +
                                std::to_string(br.to_bus) + ")";
        if (!bus_ok(br.from_bus) || !bus_ok(br.to_bus)) {
            issues.push_back(tag + ": references nonexistent bus");
            continue;
        }
        if (br.from_bus == br.to_bus) issues.push_back(tag + ": self loop");
        if (br.r_ohm < 0.0 || br.x_ohm < 0.0) issues.push_back(tag + ": negative impedance");
        if (br.r_ohm == 0.0 && br.x_ohm == 0.0) issues.push_back(tag + ": zero impedance");
        if (br.kind == BranchKind::transformer && !(br.rating_kva && *br.rating_kva > 0.0))
            issues.push_back(tag + ": transformer without positive rating");
        const auto a = find(br.from_bus);
        const auto b = find(br.to_bus);
        if (a == b)
            cyclic = true;
        else
            parent[a] = b;
    }
    if (cyclic || network.branches.size() != n - 1) issues.emplace_back("not radial: branch set is not a tree");
    for (std::size_t i = 1; i < n; ++i) {
        if (find(i) != find(0)) {
            issues.emplace_back("not connected: some buses are unreachable from the slack");
            break;
        }
    }

    for (const auto& inv : network.inverters) {
        const std::string tag = "inverter at bus " + std::to_string(inv.bus);
        if (!bus_ok(inv.bus)) {
            issues.push_back("dangling inverter: " + tag + " references nonexistent bus");
            continue;
        }
        if (network.buses[inv.bus].kind != BusKind::load) issues.push_back(tag + ": bus is not a load bus");
        if (!(inv.q_min_kvar <= 0.0 && inv.q_max_kvar >= 0.0))
            issues.push_back(tag + ": requires q_min <= 0 <= q_max");
        if (inv.p_peak_kw < 0.0) issues.push_back(tag + ": negative p_peak");
    }

    if (!(network.v_min < 1.0 && 1.0 < network.v_max)) issues.emplace_back("voltage limits must satisfy v_min < 1 < v_max");
    if (!(network.s_base_kva > 0.0)) issues.emplace_back("s_base must be positive");
    if (!(network.f_nominal_hz > 0.0)) issues.emplace_back("nominal frequency must be positive");
    return issues;
}

}  // namespace vvc
