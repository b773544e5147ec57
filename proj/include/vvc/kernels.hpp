#pragma once

// Data-parallel inner loops used by the controllers, metrics and profile
// code. Every kernel has a scalar reference implementation; an AVX2 variant
// is picked at runtime when the CPU supports it. Elementwise kernels are
// bit-identical across variants; reductions agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace vvc::kernels {

enum class Isa { scalar, avx2 };

struct ViolationSums {
    double sum = 0.0;  // sum of max(0, v - v_max) + max(0, v_min - v)
    double max = 0.0;  // largest single violation
};

struct KernelTable {
    Isa isa;
    /// lambda[i] = max(0, lambda[i] + alpha * sign * (v[i] - bound))
    void (*dual_update)(std::span<double> lambda, std::span<const double> v, double bound, double alpha,
                        double sign);
    /// x[i] = min(hi[i], max(lo[i], x[i]))
    void (*clamp)(std::span<double> x, std::span<const double> lo, std::span<const double> hi);
    double (*dot)(std::span<const double> a, std::span<const double> b);
    double (*abs_sum)(std::span<const double> x);
    ViolationSums (*violations)(std::span<const double> v, double v_min, double v_max);
    /// dst[k] = mean(src[k*window .. (k+1)*window)), dst.size() windows.
    void (*window_mean)(std::span<const double> src, std::size_t window, std::span<double> dst);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool cpu_has_avx2();

/// Table currently in use. Defaults to the best supported ISA; the
/// environment variable VVC_ISA=scalar forces the reference kernels.
const KernelTable& active();

/// Override the dispatch (tests, benchmarks). Returns false if `isa` is not
/// available on this machine/build.
bool select(Isa isa);

std::string_view name(Isa isa);

}  // namespace vvc::kernels
