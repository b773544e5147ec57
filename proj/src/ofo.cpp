#include <string>

#include "vvc/controllers.hpp"
#include "vvc/error.hpp"
#include "vvc/kernels.hpp"

namespace vvc {

OfoState OfoState::from_sensitivity(const SensitivityMatrix& sens, double alpha, double q_unit_kvar) {
    OfoState s;
    s.alpha = alpha;
    s.q_unit_kvar = q_unit_kvar;
    s.monitored = sens.row_buses;
    s.h = sens.operating_point == "identity" ? sens.h : Eigen::MatrixXd(sens.h * q_unit_kvar);
    s.lambda_min.assign(sens.row_buses.size(), 0.0);
    s.lambda_max.assign(sens.row_buses.size(), 0.0);
    s.q_prev.assign(sens.col_buses.size(), 0.0);
    return s;
}

void ofo_step_inplace(OfoState& state, std::span<const double> v, std::span<const double> q_lo,
                      std::span<const double> q_hi, double v_min, double v_max, std::span<double> q_out) {
    const auto rows = static_cast<std::size_t>(state.h.rows());
    const auto cols = static_cast<std::size_t>(state.h.cols());
    if (v.size() != rows || state.lambda_min.size() != rows || state.lambda_max.size() != rows)
        throw InvalidArgument("ofo_step: " + std::to_string(v.size()) + " observations, " +
                              std::to_string(state.lambda_min.size()) + "/" + std::to_string(state.lambda_max.size()) +
                              " duals, H has " + std::to_string(rows) + " rows");
    if (q_lo.size() != cols || q_hi.size() != cols || q_out.size() != cols)
        throw InvalidArgument("ofo_step: q limits must have one entry per H column (" + std::to_string(cols) + ")");

    const auto& k = kernels::active();
    k.dual_update(state.lambda_min, v, v_min, state.alpha, -1.0);
    k.dual_update(state.lambda_max, v, v_max, state.alpha, 1.0);

    thread_local std::vector<double> diff;
    diff.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) diff[i] = state.lambda_min[i] - state.lambda_max[i];

    // H is column-major: column j is contiguous.
    for (std::size_t j = 0; j < cols; ++j) {
        const std::span<const double> col(state.h.data() + j * rows, rows);
        q_out[j] = state.q_unit_kvar * k.dot(col, diff);
    }
    k.clamp(q_out, q_lo, q_hi);
    state.q_prev.assign(q_out.begin(), q_out.end());
}

OfoStep ofo_step(const OfoState& state, const ControllerObservation& obs, std::span<const double> q_lo,
                 std::span<const double> q_hi, double v_min, double v_max) {
    OfoStep out{state, std::vector<double>(static_cast<std::size_t>(state.h.cols()), 0.0)};
    ofo_step_inplace(out.state, obs.v_mag, q_lo, q_hi, v_min, v_max, out.q);
    return out;
}

}  // namespace vvc
