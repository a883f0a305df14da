#include "rsir/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace rsir::simd {
namespace {

double squared_l2_ff(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t diff = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
        const float64x2_t lo = vcvt_f64_f32(vget_low_f32(diff));
        const float64x2_t hi = vcvt_high_f64_f32(diff);
        acc0 = vfmaq_f64(acc0, lo, lo);
        acc1 = vfmaq_f64(acc1, hi, hi);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double diff = static_cast<double>(a[i] - b[i]);
        acc += diff * diff;
    }
    return acc;
}

double squared_l2_fd(const float* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t fa = vld1q_f32(a + i);
        const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(fa)), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vcvt_high_f64_f32(fa), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        acc += diff * diff;
    }
    return acc;
}

void accumulate_residual(double* acc, const float* f, const double* c, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t r = vsubq_f64(vcvt_f64_f32(vld1_f32(f + i)), vld1q_f64(c + i));
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), r));
    }
    for (; i < n; ++i) acc[i] += static_cast<double>(f[i]) - c[i];
}

double dot_dd(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void squared_l2_rows(const float* query, const float* rows, std::size_t count,
                     std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = squared_l2_ff(query, rows + r * dim, dim);
}

constexpr KernelTable kNeon{
    Isa::Neon, squared_l2_ff, squared_l2_fd, accumulate_residual, dot_dd, squared_l2_rows,
};

}  // namespace

const KernelTable* detail::neon_table() noexcept { return &kNeon; }

}  // namespace rsir::simd

#else

namespace rsir::simd {
const KernelTable* detail::neon_table() noexcept { return nullptr; }
}  // namespace rsir::simd

#endif
