#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rsir/matrix.hpp"

namespace rsir::linalg {

/// Thin SVD A = U * diag(singular) * V^T with r = min(rows, cols) terms,
/// singular values in descending order.
struct Svd {
    DoubleMatrix u;                // rows x r, column j is the j-th left vector
    std::vector<double> singular;  // r
    DoubleMatrix v;                // cols x r
};

/// One-sided (Hestenes) Jacobi SVD. Accurate for the tall, narrow matrices
/// that arise when fusing a handful of global descriptors.
Svd jacobi_svd(const DoubleMatrix& a);

/// max(rows, cols) * machine epsilon.
double default_pinv_tolerance(std::size_t rows, std::size_t cols) noexcept;

/// Moore-Penrose pseudo-inverse (cols x rows). Singular values at or below
/// tol * sigma_max count as zero; tol defaults to default_pinv_tolerance.
/// Throws Data on non-finite input.
DoubleMatrix pseudo_inverse(const DoubleMatrix& a, std::optional<double> tol = std::nullopt);

double frobenius_norm(const DoubleMatrix& a) noexcept;

}  // namespace rsir::linalg
