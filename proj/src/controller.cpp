#include "vvc/controller.hpp"

#include <algorithm>

#include "vvc/error.hpp"

namespace vvc {

std::string_view to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::none: return "none";
        case ControllerKind::droop: return "droop";
        case ControllerKind::mldroop: return "mldroop";
        case ControllerKind::ofo: return "ofo";
        case ControllerKind::orpf: return "orpf";
    }
    return "none";
}

ControllerKind controller_kind_from(std::string_view name) {
    for (auto k : {ControllerKind::none, ControllerKind::droop, ControllerKind::mldroop, ControllerKind::ofo,
                   ControllerKind::orpf})
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown controller '" + std::string(name) + "' (none|droop|mldroop|ofo|orpf)");
}

LocalController::LocalController(std::vector<int> inverter_buses)
    : buses_(std::move(inverter_buses)), q_(buses_.size(), 0.0) {}

const std::vector<double>& LocalController::step(const Measurement& m) {
    for (std::size_t k = 0; k < buses_.size(); ++k) q_[k] = local_setpoint(k, m.v_bus[buses_[k]], q_[k]);
    return q_;
}

void LocalController::reset() { std::fill(q_.begin(), q_.end(), 0.0); }

DroopController::DroopController(const Network& network, const ControllerSpec& spec)
    : LocalController(network.inverter_buses()) {
    for (const auto& inv : network.inverters) {
        DroopCurve c{spec.v1, spec.v2, spec.v3, spec.v4, inv.q_max_kvar, inv.q_min_kvar};
        if (!c.valid()) throw InvalidArgument("droop: breakpoints must satisfy v1 <= v2 <= v3 <= v4");
        curves_.push_back(c);
    }
}

double DroopController::local_setpoint(std::size_t inverter, double v_own, double) {
    return droop_eval(curves_[inverter], v_own);
}

MlDroopController::MlDroopController(const Network& network, const ControllerSpec& spec)
    : LocalController(network.inverter_buses()) {
    for (const auto& inv : network.inverters) {
        const auto it = std::find_if(spec.ml_curves.begin(), spec.ml_curves.end(),
                                     [&](const MlDroopCurve& c) { return c.inverter_bus == inv.bus; });
        if (it == spec.ml_curves.end())
            throw InvalidArgument("mldroop: no fitted curve for inverter at bus " + std::to_string(inv.bus));
        MlDroopCurve c = *it;
        c.beta = spec.beta;
        curves_.push_back(std::move(c));
    }
}

double MlDroopController::local_setpoint(std::size_t inverter, double v_own, double q_prev) {
    return mldroop_step(curves_[inverter], q_prev, v_own);
}

SensitivityMatrix ofo_sensitivity(const Network& network, const ControllerSpec& spec) {
    switch (spec.h_source) {
        case HSource::identity: return SensitivityMatrix::identity(network.inverter_buses());
        case HSource::file:
            if (!spec.h_matrix) throw InvalidArgument("ofo: H source 'file' but no matrix loaded");
            return *spec.h_matrix;
        case HSource::computed: break;
    }
    // Nominal operating point: no load, no generation.
    return sensitivity(network, Injections::zeros(network.bus_count()), 1.0, spec.monitor);
}

OfoController::OfoController(const Network& network, const ControllerSpec& spec)
    : q_lo_(network.q_min_kvar()),
      q_hi_(network.q_max_kvar()),
      q_(network.inverters.size(), 0.0),
      v_min_(network.v_min),
      v_max_(network.v_max) {
    const auto sens = ofo_sensitivity(network, spec);
    if (sens.col_buses != network.inverter_buses())
        throw InvalidArgument("ofo: H columns do not match the network's inverters");
    initial_ = OfoState::from_sensitivity(sens, spec.alpha, spec.q_unit_kvar);
    state_ = initial_;
    v_obs_.resize(initial_.monitored.size());
}

void OfoController::reset() {
    state_ = initial_;
    std::fill(q_.begin(), q_.end(), 0.0);
    drift_ = 0.0;
}

const std::vector<double>& OfoController::step(const Measurement& m) {
    for (std::size_t i = 0; i < v_obs_.size(); ++i) v_obs_[i] = m.v_bus[state_.monitored[i]];
    const auto rows = static_cast<Eigen::Index>(v_obs_.size());
    const Eigen::Map<const Eigen::VectorXd> lo(state_.lambda_min.data(), rows), hi(state_.lambda_max.data(), rows);
    dual_prev_ = lo - hi;
    ofo_step_inplace(state_, v_obs_, q_lo_, q_hi_, v_min_, v_max_, q_);
    const Eigen::VectorXd delta = state_.h.transpose() * (lo - hi - dual_prev_);
    drift_ = rows ? state_.q_unit_kvar * delta.lpNorm<Eigen::Infinity>() : 0.0;
    return q_;
}

OrpfController::OrpfController(const Network& network, const ControllerSpec& spec)
    : network_(network),
      pf_(network),
      options_(spec.orpf),
      q_lo_(network.q_min_kvar()),
      q_hi_(network.q_max_kvar()),
      q_(network.inverters.size(), 0.0),
      v_min_(network.v_min),
      v_max_(network.v_max) {
    options_.monitor = spec.monitor;
}

void OrpfController::reset() {
    std::fill(q_.begin(), q_.end(), 0.0);
    last_w_.reset();
}

const std::vector<double>& OrpfController::step(const Measurement& m) {
    if (!m.uncontrolled) throw InvalidArgument("orpf: measurement lacks the uncontrolled injections");
    if (last_w_ && *last_w_ == *m.uncontrolled) return q_;
    const auto r = orpf_solve(network_, pf_, *m.uncontrolled, q_lo_, q_hi_, v_min_, v_max_, options_);
    q_ = r.q_kvar;
    status_ = r.status;
    last_w_ = *m.uncontrolled;
    return q_;
}

std::unique_ptr<Controller> make_controller(const Network& network, const ControllerSpec& spec) {
    switch (spec.kind) {
        case ControllerKind::none: return std::make_unique<NoControl>(network.inverters.size());
        case ControllerKind::droop: return std::make_unique<DroopController>(network, spec);
        case ControllerKind::mldroop: return std::make_unique<MlDroopController>(network, spec);
        case ControllerKind::ofo: return std::make_unique<OfoController>(network, spec);
        case ControllerKind::orpf: return std::make_unique<OrpfController>(network, spec);
    }
    throw InvalidArgument("unknown controller kind");
}

}  // namespace vvc
