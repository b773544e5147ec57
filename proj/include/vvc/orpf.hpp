#pragma once

#include <span>
#include <vector>

#include "vvc/power_flow.hpp"
#include "vvc/qp.hpp"

namespace vvc {

enum class OrpfStatus { optimal, infeasible_fallback };

struct OrpfOptions {
    double trust_fraction = 0.2;  // per-iteration step bound, fraction of (q_max - q_min)
    int max_outer = 20;
    double q_tolerance_kvar = 1e-3;
    double delta_q_kvar = 1.0;  // finite-difference step for the re-linearization
    DualAscentOptions qp{1e-6, 200000};
    MonitoredBuses monitor = MonitoredBuses::inverter_buses;
};

struct OrpfResult {
    std::vector<double> q_kvar;  // per inverter
    OrpfStatus status = OrpfStatus::optimal;
    int iterations = 0;
};

/// Optimal reactive power flow
///   min 1/2 q'q  s.t.  v_min <= v_h(q, w) <= v_max,  q_lo <= q <= q_hi
/// by successive linearization. `w` carries the uncontrolled injections; the
/// inverter entries of w.q_kvar are the baseline the setpoints add to. When
/// the voltage band cannot be met inside the box the result minimizes the
/// summed linearized violation instead (status infeasible_fallback).
/// Throws NumericalError if a power flow diverges.
OrpfResult orpf_solve(const Network& network, const RadialPowerFlow& pf, const Injections& w,
                      std::span<const double> q_lo, std::span<const double> q_hi, double v_min, double v_max,
                      const OrpfOptions& options = {});

OrpfResult orpf_solve(const Network& network, const Injections& w, std::span<const double> q_lo,
                      std::span<const double> q_hi, double v_min, double v_max, const OrpfOptions& options = {});

}  // namespace vvc
