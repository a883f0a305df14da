#include "rsir/simd/kernels.hpp"

namespace rsir::simd {
namespace {

double squared_l2_ff(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = static_cast<double>(a[i] - b[i]);
        acc += diff * diff;
    }
    return acc;
}

double squared_l2_fd(const float* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = static_cast<double>(a[i]) - b[i];
        acc += diff * diff;
    }
    return acc;
}

void accumulate_residual(double* acc, const float* f, const double* c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(f[i]) - c[i];
}

double dot_dd(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void squared_l2_rows(const float* query, const float* rows, std::size_t count,
                     std::size_t dim, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = squared_l2_ff(query, rows + r * dim, dim);
}

constexpr KernelTable kScalar{
    Isa::Scalar, squared_l2_ff, squared_l2_fd, accumulate_residual, dot_dd, squared_l2_rows,
};

}  // namespace

const KernelTable& detail::scalar_table() noexcept { return kScalar; }

}  // namespace rsir::simd
