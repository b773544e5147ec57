#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vvc/controllers.hpp"
#include "vvc/orpf.hpp"
#include "vvc/profiles.hpp"

namespace vvc {

struct TrainingSample {
    std::int64_t timestamp = 0;
    int inverter_bus = 0;
    double v_pu = 0.0;
    double q_kvar = 0.0;

    bool operator==(const TrainingSample&) const = default;
};

/// ORPF Volt/VAr pairs, ordered by timestamp then inverter.
struct TrainingSet {
    std::vector<TrainingSample> samples;
    std::size_t skipped_steps = 0;  // steps whose power flow diverged

    std::vector<std::pair<double, double>> pairs_for(int inverter_bus) const;
};

struct TrainingOptions {
    double load_power_factor = 0.95;
    OrpfOptions orpf;
    bool require_full_day = true;
};

/// Runs ORPF on every profile sample, re-solves the power flow with the
/// optimal setpoints and records (v, q) at each inverter bus. Uses the
/// network's inverter ratings and voltage limits as given.
TrainingSet generate_training_data(const Network& network, const ProfileSet& profiles,
                                   const TrainingOptions& options = {});

struct FitOptions {
    int breakpoints = 9;
    double margin_pu = 0.01;  // grid spans [v_min - margin, v_max + margin]
    double slope_floor = -1800.0;
    double beta = 0.8;
    DualAscentOptions qp{1e-8, 20000};
};

/// Least-squares piecewise-linear fit on a uniform breakpoint grid with
/// every segment slope in [slope_floor, 0] and the interpolant pinned to
/// (v_min, q_max) and (v_max, q_min). Throws InvalidArgument for empty input
/// or fewer than two distinct voltages, NumericalError when the pins cannot
/// be joined within the slope bound.
MlDroopCurve fit_curve(const std::vector<std::pair<double, double>>& pairs, double q_min, double q_max,
                       double v_min, double v_max, const FitOptions& options = {});

/// One fitted curve per inverter, in network order.
std::vector<MlDroopCurve> fit_all(const Network& network, const TrainingSet& training, const FitOptions& options = {});

/// Empty iff the curve meets its slope bounds and passes through both pins
/// within `tol` kVAr.
std::vector<std::string> check_curve(const MlDroopCurve& curve, double v_min, double v_max, double tol = 1e-6);

/// Root-mean-square distance between curve.eval(v) and q over `pairs`.
double fit_rms(const MlDroopCurve& curve, const std::vector<std::pair<double, double>>& pairs);

// `timestamp,inverter_bus,v_pu,q_kvar`
std::string training_to_csv(const TrainingSet& training);
TrainingSet training_from_csv(const std::string& text);

// {inverter_bus, breakpoints: [[v, q], ...], beta, slope_floor, q_min, q_max}
std::string curve_to_json(const MlDroopCurve& curve);
MlDroopCurve curve_from_json(const std::string& text);

}  // namespace vvc
