#pragma once

#include <string>
#include <vector>

#include "vvc/simulation.hpp"

namespace vvc {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// `timestamp,bus,v_pu`, one row per record and LV bus.
std::string voltages_to_csv(const SimulationResult& result);
/// `timestamp,inverter_bus,q_kvar`, one row per record and inverter.
std::string setpoints_to_csv(const SimulationResult& result);

struct LongRow {
    std::int64_t timestamp = 0;
    int id = 0;
    double value = 0.0;
};
/// Reads either long-format file back; `header` must match exactly.
std::vector<LongRow> long_csv_rows(const std::string& text, const std::string& header);

/// Capacities of several sweeps: {"v_max_pu", "controllers": {name: {capacity_kw, levels}}}.
std::string capacity_to_json(const std::vector<CapacityResult>& sweeps);
std::vector<CapacityResult> capacity_from_json(const std::string& text);
/// `controller,p_per_bus_kw,p_total_kw,max_v_pu,substeps,steady`
std::string capacity_levels_to_csv(const std::vector<CapacityResult>& sweeps);

/// Header row `bus,<col ids>`, then one row per monitored bus.
std::string sensitivity_to_csv(const SensitivityMatrix& h);
SensitivityMatrix sensitivity_from_csv(const std::string& text);

}  // namespace vvc
