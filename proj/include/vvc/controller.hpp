#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vvc/controllers.hpp"
#include "vvc/orpf.hpp"

namespace vvc {

enum class ControllerKind { none, droop, mldroop, ofo, orpf };

std::string_view to_string(ControllerKind kind);
/// Throws InvalidArgument for unknown names.
ControllerKind controller_kind_from(std::string_view name);

enum class HSource { computed, identity, file };

/// Everything needed to instantiate any of the controllers.
struct ControllerSpec {
    ControllerKind kind = ControllerKind::none;
    // droop
    double v1 = 0.90, v2 = 0.97, v3 = 1.03, v4 = 1.10;
    // ML-droop
    std::vector<MlDroopCurve> ml_curves;  // one per inverter, matched by bus
    double beta = 0.8;
    // OFO
    double alpha = 4.0;
    double q_unit_kvar = 1000.0;
    HSource h_source = HSource::computed;
    std::optional<SensitivityMatrix> h_matrix;  // used when h_source == file
    MonitoredBuses monitor = MonitoredBuses::inverter_buses;
    // ORPF
    OrpfOptions orpf;
};

/// What a controller gets to see at one control instant.
struct Measurement {
    double timestamp = 0.0;
    std::span<const double> v_bus;  // p.u., indexed by bus id (all buses)
    const Injections* uncontrolled = nullptr;  // w, only model-based control may read it
};

class Controller {
  public:
    virtual ~Controller() = default;
    virtual ControllerKind kind() const = 0;
    /// Back to the initial state (zero setpoints, zero duals).
    virtual void reset() = 0;
    /// New setpoints, kVAr per inverter (network.inverters order).
    virtual const std::vector<double>& step(const Measurement& m) = 0;
    /// Largest change (kVAr) the last step made to the controller's internal
    /// setpoint before projection onto the inverter limits. Zero for laws
    /// whose only state is the setpoint itself.
    virtual double internal_drift_kvar() const { return 0.0; }
};

/// Base for purely local laws: each inverter's setpoint depends only on its
/// own bus voltage (and its own history). Subclasses never see the other
/// buses.
class LocalController : public Controller {
  public:
    explicit LocalController(std::vector<int> inverter_buses);
    const std::vector<double>& step(const Measurement& m) final;
    void reset() override;

  protected:
    virtual double local_setpoint(std::size_t inverter, double v_own, double q_prev) = 0;

  private:
    std::vector<int> buses_;
    std::vector<double> q_;
};

class NoControl final : public Controller {
  public:
    explicit NoControl(std::size_t inverters) : q_(inverters, 0.0) {}
    ControllerKind kind() const override { return ControllerKind::none; }
    void reset() override {}
    const std::vector<double>& step(const Measurement&) override { return q_; }

  private:
    std::vector<double> q_;
};

class DroopController final : public LocalController {
  public:
    DroopController(const Network& network, const ControllerSpec& spec);
    ControllerKind kind() const override { return ControllerKind::droop; }
    const std::vector<DroopCurve>& curves() const { return curves_; }

  protected:
    double local_setpoint(std::size_t inverter, double v_own, double q_prev) override;

  private:
    std::vector<DroopCurve> curves_;
};

class MlDroopController final : public LocalController {
  public:
    MlDroopController(const Network& network, const ControllerSpec& spec);
    ControllerKind kind() const override { return ControllerKind::mldroop; }

  protected:
    double local_setpoint(std::size_t inverter, double v_own, double q_prev) override;

  private:
    std::vector<MlDroopCurve> curves_;
};

class OfoController final : public Controller {
  public:
    OfoController(const Network& network, const ControllerSpec& spec);
    ControllerKind kind() const override { return ControllerKind::ofo; }
    void reset() override;
    const std::vector<double>& step(const Measurement& m) override;
    const OfoState& state() const { return state_; }
    double internal_drift_kvar() const override { return drift_; }

  private:
    OfoState initial_;
    OfoState state_;
    std::vector<double> q_lo_, q_hi_, v_obs_, q_;
    Eigen::VectorXd dual_prev_;
    double drift_ = 0.0;
    double v_min_, v_max_;
};

class OrpfController final : public Controller {
  public:
    OrpfController(const Network& network, const ControllerSpec& spec);
    ControllerKind kind() const override { return ControllerKind::orpf; }
    void reset() override;
    const std::vector<double>& step(const Measurement& m) override;
    OrpfStatus last_status() const { return status_; }

  private:
    const Network& network_;
    RadialPowerFlow pf_;
    OrpfOptions options_;
    std::vector<double> q_lo_, q_hi_, q_;
    double v_min_, v_max_;
    std::optional<Injections> last_w_;  // ORPF is a pure function of w
    OrpfStatus status_ = OrpfStatus::optimal;
};

/// Factory. The network must outlive the controller. Throws InvalidArgument
/// when the spec is incomplete for its kind (e.g. ML-droop without curves).
std::unique_ptr<Controller> make_controller(const Network& network, const ControllerSpec& spec);

/// Sensitivity the OFO controller would use for this spec.
SensitivityMatrix ofo_sensitivity(const Network& network, const ControllerSpec& spec);

}  // namespace vvc
