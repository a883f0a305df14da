// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "rsir/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace rsir::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double squared_l2_ff(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 diff = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
        const __m256d lo = _mm256_cvtps_pd(_mm256_castps256_ps128(diff));
        const __m256d hi = _mm256_cvtps_pd(_mm256_extractf128_ps(diff, 1));
        acc0 = _mm256_fmadd_pd(lo, lo, acc0);
        acc1 = _mm256_fmadd_pd(hi, hi, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double diff = static_cast<double>(a[i] - b[i]);
        acc += diff * diff;
    }
    return acc;
}

double squared_l2_fd(const float* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_loadu_pd(b + i));
        const __m256d d1 =
            _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i + 4)), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        acc += diff * diff;
    }
    return acc;
}

void accumulate_residual(double* acc, const float* f, const double* c, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(f + i)), _mm256_loadu_pd(c + i));
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), r));
    }
    for (; i < n; ++i) acc[i] += static_cast<double>(f[i]) - c[i];
}

double dot_dd(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void squared_l2_rows(const float* query, const float* rows, std::size_t count,
                     std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = squared_l2_ff(query, rows + r * dim, dim);
}

constexpr KernelTable kAvx2{
    Isa::Avx2, squared_l2_ff, squared_l2_fd, accumulate_residual, dot_dd, squared_l2_rows,
};

}  // namespace

const KernelTable* detail::avx2_table() noexcept { return &kAvx2; }

}  // namespace rsir::simd

#else

namespace rsir::simd {
const KernelTable* detail::avx2_table() noexcept { return nullptr; }
}  // namespace rsir::simd

#endif
