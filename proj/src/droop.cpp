#include <algorithm>
#include <cmath>

#include "vvc/controllers.hpp"

namespace vvc {

bool DroopCurve::valid() const {
    return v1 <= v2 && v2 <= v3 && v3 <= v4 && q_min <= 0.0 && 0.0 <= q_max;
}

double droop_eval(const DroopCurve& c, double v) {
    if (v < c.v1) return c.q_max;
    if (v <= c.v2) return c.v2 > c.v1 ? c.q_max * (c.v2 - v) / (c.v2 - c.v1) : 0.0;
    if (v <= c.v3) return 0.0;
    if (v <= c.v4) return c.v4 > c.v3 ? c.q_min * (v - c.v3) / (c.v4 - c.v3) : c.q_min;
    return c.q_min;
}

double MlDroopCurve::eval(double v) const {
    double q;
    if (breakpoints.empty()) {
        q = 0.0;
    } else if (v <= breakpoints.front().first) {
        q = breakpoints.front().second;
    } else if (v >= breakpoints.back().first) {
        q = breakpoints.back().second;
    } else {
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), v,
                                         [](double x, const auto& bp) { return x < bp.first; });
        const auto& [v1, q1] = *std::prev(it);
        const auto& [v2, q2] = *it;
        q = q1 + (q2 - q1) * (v - v1) / (v2 - v1);
    }
    return std::clamp(q, q_min, q_max);
}

std::vector<double> MlDroopCurve::slopes() const {
    std::vector<double> s;
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
        s.push_back((breakpoints[k].second - breakpoints[k - 1].second) /
                    (breakpoints[k].first - breakpoints[k - 1].first));
    return s;
}

double mldroop_step(const MlDroopCurve& curve, double q_prev, double v) {
    const double q = (1.0 - curve.beta) * q_prev + curve.beta * curve.eval(v);
    return std::clamp(q, curve.q_min, curve.q_max);
}

}  // namespace vvc
