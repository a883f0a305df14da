#include "rsir/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsir/error.hpp"

namespace rsir::linalg {
namespace {

constexpr int kMaxSweeps = 80;

using Columns = std::vector<std::vector<double>>;

Columns columns_of(const DoubleMatrix& a) {
    Columns cols(a.cols(), std::vector<double>(a.rows()));
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) cols[c][r] = a(r, c);
    }
    return cols;
}

DoubleMatrix transpose(const DoubleMatrix& a) {
    DoubleMatrix t(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
    }
    return t;
}

void rotate(std::vector<double>& p, std::vector<double>& q, double c, double s) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double a = p[i];
        const double b = q[i];
        p[i] = c * a - s * b;
        q[i] = s * a + c * b;
    }
}

// Requires rows >= cols.
Svd tall_svd(const DoubleMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Columns w = columns_of(a);
    Columns v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += w[p][i] * w[p][i];
                    beta += w[q][i] * w[q][i];
                    gamma += w[p][i] * w[q][i];
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(w[p], w[q], c, s);
                rotate(v[p], v[q], c, s);
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sq = 0.0;
        for (double x : w[j]) sq += x * x;
        sigma[j] = std::sqrt(sq);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Svd out{DoubleMatrix(m, n), std::vector<double>(n), DoubleMatrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.singular[j] = sigma[src];
        const double inv = sigma[src] > 0.0 ? 1.0 / sigma[src] : 0.0;
        for (std::size_t i = 0; i < m; ++i) out.u(i, j) = w[src][i] * inv;
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v[src][i];
    }
    return out;
}

}  // namespace

Svd jacobi_svd(const DoubleMatrix& a) {
    if (a.rows() >= a.cols()) return tall_svd(a);
    Svd t = tall_svd(transpose(a));
    return Svd{std::move(t.v), std::move(t.singular), std::move(t.u)};
}

double default_pinv_tolerance(std::size_t rows, std::size_t cols) noexcept {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

DoubleMatrix pseudo_inverse(const DoubleMatrix& a, std::optional<double> tol) {
    for (double x : a.values()) {
        if (!std::isfinite(x)) fail(ErrorKind::Data, "pseudo-inverse of a matrix with non-finite entries");
    }
    DoubleMatrix pinv(a.cols(), a.rows());
    if (a.rows() == 0 || a.cols() == 0) return pinv;

    const Svd svd = jacobi_svd(a);
    const double sigma_max = svd.singular.front();
    const double cutoff = tol.value_or(default_pinv_tolerance(a.rows(), a.cols())) * sigma_max;
    for (std::size_t j = 0; j < svd.singular.size(); ++j) {
        const double s = svd.singular[j];
        if (s <= cutoff || s == 0.0) break;  // descending
        const double inv = 1.0 / s;
        for (std::size_t r = 0; r < a.cols(); ++r) {
            const double vr = svd.v(r, j) * inv;
            if (vr == 0.0) continue;
            auto out = pinv.row(r);
            for (std::size_t c = 0; c < a.rows(); ++c) out[c] += vr * svd.u(c, j);
        }
    }
    return pinv;
}

double frobenius_norm(const DoubleMatrix& a) noexcept {
    double sq = 0.0;
    for (double x : a.values()) sq += x * x;
    return std::sqrt(sq);
}

}  // namespace rsir::linalg
