#pragma once

// Arithmetic inner loops used by matching, codebook assignment, VLAD
// accumulation and PCA projection.
//
// Every kernel has a scalar reference implementation and optional AVX2 / NEON
// variants. The variant is chosen once at startup from the CPU features, and
// can be forced with RSIR_SIMD=scalar|avx2|neon. All variants accumulate in
// double precision; they differ from the scalar reference only by summation
// order.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace rsir::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;

    /// sum_i (a_i - b_i)^2, difference taken in float, squares summed in double.
    double (*squared_l2_ff)(const float* a, const float* b, std::size_t n);

    /// sum_i (a_i - b_i)^2 with a double-precision right-hand side.
    double (*squared_l2_fd)(const float* a, const double* b, std::size_t n);

    /// acc_i += f_i - c_i
    void (*accumulate_residual)(double* acc, const float* f, const double* c, std::size_t n);

    /// sum_i a_i * b_i
    double (*dot_dd)(const double* a, const double* b, std::size_t n);

    /// out_r = squared_l2_ff(query, rows + r * dim, dim) for r in [0, count)
    void (*squared_l2_rows)(const float* query, const float* rows, std::size_t count,
                            std::size_t dim, double* out);
};

/// Kernels selected for this process.
const KernelTable& active() noexcept;

/// Kernel table for a specific ISA, or nullptr when the CPU or build lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
const KernelTable* neon_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

// Convenience wrappers over active().

inline double squared_l2(std::span<const float> a, std::span<const float> b) {
    return active().squared_l2_ff(a.data(), b.data(), a.size());
}

inline double squared_l2(std::span<const float> a, std::span<const double> b) {
    return active().squared_l2_fd(a.data(), b.data(), a.size());
}

inline void accumulate_residual(std::span<double> acc, std::span<const float> f,
                                std::span<const double> c) {
    active().accumulate_residual(acc.data(), f.data(), c.data(), acc.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot_dd(a.data(), b.data(), a.size());
}

}  // namespace rsir::simd
