#include "vvc/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "vvc/error.hpp"
#include "vvc/kernels.hpp"
#include "vvc/simulation.hpp"

namespace vvc {

std::size_t VoltageHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t VoltageHistogram::bin_of(double v) const {
    // The small offset keeps exact bin edges such as 1.000 in the upper bin
    // despite the rounding in (v - low) / width.
    const double pos = std::floor((v - low_pu) / width_pu + 1e-9);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), counts.size() - 1);
}

MetricsReport compute_metrics(std::span<const double> v, std::size_t buses, std::span<const double> q,
                              std::size_t inverters, double dt_s, double v_min, double v_max) {
    if (buses == 0 || v.size() % buses != 0) throw InvalidArgument("metrics: voltage block is not records x buses");
    const std::size_t records = v.size() / buses;
    if (records == 0) throw InvalidArgument("metrics: empty result");
    if (q.size() != records * inverters) throw InvalidArgument("metrics: setpoint block does not match record count");
    if (!(dt_s > 0.0)) throw InvalidArgument("metrics: step must be positive");

    const auto& k = kernels::active();
    const double dt_h = dt_s / 3600.0;
    MetricsReport r;
    r.records = records;
    r.buses = buses;
    r.duration_h = static_cast<double>(records) * dt_h;
    for (std::size_t t = 0; t < records; ++t) {
        const auto row = v.subspan(t * buses, buses);
        const auto viol = k.violations(row, v_min, v_max);
        if (viol.max > 0.0) r.violation_time_h += dt_h;
        r.violation_energy_puh += viol.sum * dt_h;
        r.max_violation_pu = std::max(r.max_violation_pu, viol.max);
        for (double x : row) ++r.voltage_histogram.counts[r.voltage_histogram.bin_of(x)];
        if (inverters) r.reactive_energy_kvarh += k.abs_sum(q.subspan(t * inverters, inverters)) * dt_h;
    }
    return r;
}

MetricsReport compute(const SimulationResult& result, double v_min, double v_max) {
    return compute_metrics(result.v_pu, result.buses.size(), result.q_kvar, result.inverter_buses.size(),
                           result.controller_step_s, v_min, v_max);
}

std::string metrics_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["violation_time_h"] = r.violation_time_h;
    j["violation_energy_puh"] = r.violation_energy_puh;
    j["max_violation_pu"] = r.max_violation_pu;
    j["reactive_energy_kvarh"] = r.reactive_energy_kvarh;
    j["duration_h"] = r.duration_h;
    j["records"] = r.records;
    j["buses"] = r.buses;
    j["voltage_histogram"] = {{"low_pu", r.voltage_histogram.low_pu},
                              {"width_pu", r.voltage_histogram.width_pu},
                              {"counts", r.voltage_histogram.counts}};
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        MetricsReport r;
        r.violation_time_h = j.at("violation_time_h").get<double>();
        r.violation_energy_puh = j.at("violation_energy_puh").get<double>();
        r.max_violation_pu = j.at("max_violation_pu").get<double>();
        r.reactive_energy_kvarh = j.at("reactive_energy_kvarh").get<double>();
        r.duration_h = j.at("duration_h").get<double>();
        r.records = j.at("records").get<std::size_t>();
        r.buses = j.at("buses").get<std::size_t>();
        const auto& h = j.at("voltage_histogram");
        r.voltage_histogram.low_pu = h.at("low_pu").get<double>();
        r.voltage_histogram.width_pu = h.at("width_pu").get<double>();
        r.voltage_histogram.counts = h.at("counts").get<std::vector<std::size_t>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metrics: ") + e.what());
    }
}

std::string histogram_to_csv(const VoltageHistogram& h) {
    std::string out = "bin_low_pu,count\n";
    char buf[32];
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        // Rounded to the bin grid so edges print as 0.9, 0.902, ...
        const double low = std::round((h.low_pu + static_cast<double>(i) * h.width_pu) * 1e6) / 1e6;
        const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, low);
        out.append(buf, ptr);
        out += ',' + std::to_string(h.counts[i]) + '\n';
    }
    return out;
}

}  // namespace vvc
