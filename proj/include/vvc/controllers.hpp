#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vvc/power_flow.hpp"

namespace vvc {

// ---------------------------------------------------------------------------
// Standard droop
// ---------------------------------------------------------------------------

/// Piecewise-linear Volt/VAr curve with a deadband [v2, v3]: full injection
/// below v1, full absorption above v4.
struct DroopCurve {
    double v1 = 0.90;
    double v2 = 0.97;
    double v3 = 1.03;
    double v4 = 1.10;
    double q_max = 0.0;  // kVAr, >= 0
    double q_min = 0.0;  // kVAr, <= 0

    bool valid() const;
};

/// Exact piecewise evaluation (kVAr). Total; degenerate segments (v1 == v2)
/// behave as steps.
double droop_eval(const DroopCurve& curve, double v);

// ---------------------------------------------------------------------------
// ML-tuned droop
// ---------------------------------------------------------------------------

struct MlDroopCurve {
    int inverter_bus = -1;
    std::vector<std::pair<double, double>> breakpoints;  // (v p.u., q kVAr), v ascending
    double beta = 0.8;
    double slope_floor = -1800.0;  // kVAr per p.u., most negative admissible slope
    double q_min = 0.0;
    double q_max = 0.0;

    /// Clamped linear interpolation, constant beyond the outer breakpoints.
    double eval(double v) const;
    /// Slope of every segment, kVAr per p.u.
    std::vector<double> slopes() const;
};

/// First-order low-pass filtered curve evaluation, clamped to [q_min, q_max]:
/// q = (1 - beta) q_prev + beta f(v).
double mldroop_step(const MlDroopCurve& curve, double q_prev, double v);

// ---------------------------------------------------------------------------
// Online feedback optimization (dual ascent)
// ---------------------------------------------------------------------------

struct OfoState {
    std::vector<double> lambda_min;  // one per monitored bus, >= 0
    std::vector<double> lambda_max;
    double alpha = 4.0;
    /// Sensitivity used by the controller, p.u. voltage per `q_unit_kvar`.
    Eigen::MatrixXd h;
    std::vector<int> monitored;  // bus id of each row of h
    /// Reactive-power unit in which h and the setpoint update are expressed.
    double q_unit_kvar = 1000.0;
    std::vector<double> q_prev;  // kVAr per inverter

    /// Zero duals sized for `sens`. `sens.h` is in p.u. per kVAr unless it is
    /// the identity substitute, which is used as-is in the working unit.
    static OfoState from_sensitivity(const SensitivityMatrix& sens, double alpha = 4.0, double q_unit_kvar = 1000.0);
};

struct ControllerObservation {
    std::span<const double> v_mag;  // p.u., one entry per monitored bus
    double timestamp = 0.0;         // s
};

struct OfoStep {
    OfoState state;
    std::vector<double> q;  // kVAr per inverter
};

/// One dual-ascent iteration:
///   lambda_min <- [lambda_min + alpha (v_min - v)]+
///   lambda_max <- [lambda_max + alpha (v - v_max)]+
///   q_unc = H' (lambda_min - lambda_max), q = clamp(q_unc, q_lo, q_hi)
OfoStep ofo_step(const OfoState& state, const ControllerObservation& obs, std::span<const double> q_lo,
                 std::span<const double> q_hi, double v_min, double v_max);

/// In-place variant used by the simulation loop; returns q in `q_out`.
void ofo_step_inplace(OfoState& state, std::span<const double> v_monitored, std::span<const double> q_lo,
                      std::span<const double> q_hi, double v_min, double v_max, std::span<double> q_out);

}  // namespace vvc
