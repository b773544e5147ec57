#pragma once

#include <optional>
#include <string>
#include <vector>

namespace vvc {

enum class BusKind { slack, junction, load };
enum class BranchKind { line, transformer };

struct Bus {
    int id = 0;
    double nominal_v = 400.0;  // line-to-line, volts
    BusKind kind = BusKind::junction;
    double nominal_load_kw = 0.0;  // rated load of the aggregated neighbourhood, load buses only

    bool operator==(const Bus&) const = default;
};

/// Series branch. Transformer impedances are referred to the `to_bus` side.
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    BranchKind kind = BranchKind::line;
    std::optional<double> rating_kva;

    bool operator==(const Branch&) const = default;
};

struct Inverter {
    int bus = 0;
    double p_peak_kw = 0.0;
    double q_min_kvar = 0.0;  // <= 0, absorption limit
    double q_max_kvar = 0.0;  // >= 0, injection limit

    bool operator==(const Inverter&) const = default;
};

/// Balanced positive-sequence model of a radial feeder. Immutable by
/// convention once built; share it read-only between workers.
struct Network {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Inverter> inverters;
    double f_nominal_hz = 50.0;
    double v_min = 0.905;
    double v_max = 1.095;
    double s_base_kva = 500.0;

    bool operator==(const Network&) const = default;

    std::size_t bus_count() const { return buses.size(); }
    int slack_bus() const;
    std::vector<int> inverter_buses() const;
    std::vector<double> q_min_kvar() const;
    std::vector<double> q_max_kvar() const;
};

struct CigreOptions {
    double q_per_p_peak = 0.44;  // q_max = -q_min = ratio * p_peak
    double v_min = 0.905;
    double v_max = 1.095;
};

/// Residential feeder of the CIGRE European LV benchmark: MV slack (bus 0),
/// 500 kVA transformer, LV buses R1..R18 as ids 1..18, loads and PV
/// inverters at R11, R15, R16, R17, R18.
Network build_cigre_lv_residential(const CigreOptions& options = {});

/// Two-winding transformer as a series branch from short-circuit data.
Branch transformer_branch(int from_bus, int to_bus, double rating_kva, double v_lv_volts,
                          double vk_percent, double vkr_percent);

/// Multiplies every inverter's p_peak, q_min and q_max by `factor`.
Network scale_pv(const Network& network, double factor);

/// Empty iff every structural invariant holds; one entry per problem.
std::vector<std::string> validate(const Network& network);

// Grid file (JSON). Throws ParseError on malformed input.
Network network_from_json(const std::string& text);
std::string network_to_json(const Network& network);
Network load_network(const std::string& path);
void save_network(const Network& network, const std::string& path);

}  // namespace vvc
