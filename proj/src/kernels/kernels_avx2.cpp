#include <immintrin.h>

#include <cmath>

#include "vvc/kernels.hpp"

namespace vvc::kernels {
namespace {

// Lane-wise order of operations mirrors the scalar kernels exactly for the
// elementwise ops (no FMA contraction: this TU is built with -mavx2 only).

void dual_update(std::span<double> lambda, std::span<const double> v, double bound, double alpha, double sign) {
    const std::size_t n = lambda.size();
    const __m256d vb = _mm256_set1_pd(bound);
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vs = _mm256_set1_pd(sign);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff = _mm256_mul_pd(vs, _mm256_sub_pd(_mm256_loadu_pd(v.data() + i), vb));
        const __m256d step = _mm256_add_pd(_mm256_loadu_pd(lambda.data() + i), _mm256_mul_pd(va, diff));
        // max(step, 0) with step first so a NaN step propagates like the scalar ternary (-> 0).
        _mm256_storeu_pd(lambda.data() + i, _mm256_and_pd(step, _mm256_cmp_pd(step, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) {
        const double step = lambda[i] + alpha * (sign * (v[i] - bound));
        lambda[i] = step > 0.0 ? step : 0.0;
    }
}

void clamp(std::span<double> x, std::span<const double> lo, std::span<const double> hi) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x.data() + i);
        const __m256d l = _mm256_loadu_pd(lo.data() + i);
        const __m256d h = _mm256_loadu_pd(hi.data() + i);
        const __m256d a = _mm256_blendv_pd(l, xv, _mm256_cmp_pd(xv, l, _CMP_GT_OQ));
        _mm256_storeu_pd(x.data() + i, _mm256_blendv_pd(h, a, _mm256_cmp_pd(a, h, _CMP_LT_OQ)));
    }
    for (; i < n; ++i) {
        const double a = x[i] > lo[i] ? x[i] : lo[i];
        x[i] = a < hi[i] ? a : hi[i];
    }
}

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_max_sd(m, _mm_unpackhi_pd(m, m)));
}

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double abs_sum(std::span<const double> x) {
    const std::size_t n = x.size();
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x.data() + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(x[i]);
    return s;
}

ViolationSums violations(std::span<const double> v, double v_min, double v_max) {
    const std::size_t n = v.size();
    const __m256d hi = _mm256_set1_pd(v_max);
    const __m256d lo = _mm256_set1_pd(v_min);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = zero;
    __m256d mx = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d e = _mm256_loadu_pd(v.data() + i);
        const __m256d over = _mm256_max_pd(_mm256_sub_pd(e, hi), zero);
        const __m256d under = _mm256_max_pd(_mm256_sub_pd(lo, e), zero);
        const __m256d viol = _mm256_add_pd(over, under);
        acc = _mm256_add_pd(acc, viol);
        mx = _mm256_max_pd(mx, viol);
    }
    ViolationSums out{hsum(acc), hmax(mx)};
    for (; i < n; ++i) {
        const double over = v[i] - v_max > 0.0 ? v[i] - v_max : 0.0;
        const double under = v_min - v[i] > 0.0 ? v_min - v[i] : 0.0;
        const double viol = over + under;
        out.sum += viol;
        out.max = viol > out.max ? viol : out.max;
    }
    return out;
}

void window_mean(std::span<const double> src, std::size_t window, std::span<double> dst) {
    const double inv = 1.0 / static_cast<double>(window);
    for (std::size_t k = 0; k < dst.size(); ++k) {
        const double* p = src.data() + k * window;
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= window; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(p + i));
        double s = hsum(acc);
        for (; i < window; ++i) s += p[i];
        dst[k] = s * inv;
    }
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{Isa::avx2, dual_update, clamp, dot, abs_sum, violations, window_mean};
    return table;
}

}  // namespace vvc::kernels
