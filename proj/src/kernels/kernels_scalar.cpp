#include <algorithm>
#include <cmath>

#include "vvc/kernels.hpp"

namespace vvc::kernels {
namespace {

void dual_update(std::span<double> lambda, std::span<const double> v, double bound, double alpha, double sign) {
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const double step = lambda[i] + alpha * (sign * (v[i] - bound));
        lambda[i] = step > 0.0 ? step : 0.0;
    }
}

void clamp(std::span<double> x, std::span<const double> lo, std::span<const double> hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] > lo[i] ? x[i] : lo[i];
        x[i] = a < hi[i] ? a : hi[i];
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double abs_sum(std::span<const double> x) {
    double s = 0.0;
    for (double e : x) s += std::fabs(e);
    return s;
}

ViolationSums violations(std::span<const double> v, double v_min, double v_max) {
    ViolationSums out;
    for (double e : v) {
        const double over = e - v_max > 0.0 ? e - v_max : 0.0;
        const double under = v_min - e > 0.0 ? v_min - e : 0.0;
        const double viol = over + under;
        out.sum += viol;
        out.max = viol > out.max ? viol : out.max;
    }
    return out;
}

void window_mean(std::span<const double> src, std::size_t window, std::span<double> dst) {
    const double inv = 1.0 / static_cast<double>(window);
    for (std::size_t k = 0; k < dst.size(); ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < window; ++i) s += src[k * window + i];
        dst[k] = s * inv;
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Isa::scalar, dual_update, clamp, dot, abs_sum, violations, window_mean};
    return table;
}

}  // namespace vvc::kernels
