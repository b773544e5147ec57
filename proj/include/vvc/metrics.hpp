#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vvc {

struct VoltageHistogram {
    double low_pu = 0.90;
    double width_pu = 0.002;
    std::vector<std::size_t> counts = std::vector<std::size_t>(100, 0);

    std::size_t total() const;
    /// Bin for `v`; values outside the range land in the end bins.
    std::size_t bin_of(double v) const;
    bool operator==(const VoltageHistogram&) const = default;
};

struct MetricsReport {
    double violation_time_h = 0.0;      // time with any bus outside [v_min, v_max]
    double violation_energy_puh = 0.0;  // integral of the summed per-bus violation
    double max_violation_pu = 0.0;
    double reactive_energy_kvarh = 0.0;  // integral of sum |q|
    double duration_h = 0.0;
    std::size_t records = 0;
    std::size_t buses = 0;
    VoltageHistogram voltage_histogram;

    bool operator==(const MetricsReport&) const = default;
};

/// Piecewise-constant, left-aligned integration: every record holds for
/// `dt_s` seconds. `v` is records x buses row-major, `q` records x inverters.
MetricsReport compute_metrics(std::span<const double> v, std::size_t buses, std::span<const double> q,
                              std::size_t inverters, double dt_s, double v_min, double v_max);

struct SimulationResult;
/// Throws InvalidArgument for an empty result.
MetricsReport compute(const SimulationResult& result, double v_min, double v_max);

std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);
/// `bin_low_pu,count`
std::string histogram_to_csv(const VoltageHistogram& histogram);

}  // namespace vvc
