#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <tuple>

#include "oracles.hpp"
#include "rsir/error.hpp"
#include "rsir/pca.hpp"
#include "temp_dir.hpp"

using namespace rsir;

namespace {

// Correlated data: Gaussian rows times a random mixing matrix, plus an offset.
FloatMatrix correlated(std::size_t n, std::size_t d, std::mt19937_64& rng) {
    const DoubleMatrix z = oracle::random_doubles(n, d, rng);
    const DoubleMatrix mix = oracle::random_doubles(d, d, rng);
    const DoubleMatrix x = oracle::matmul(z, mix);
    FloatMatrix out(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) out(i, j) = static_cast<float>(x(i, j) + 0.5 * static_cast<double>(j));
    }
    return out;
}

double dot_rows(const DoubleMatrix& m, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.cols(); ++i) s += m(a, i) * m(b, i);
    return s;
}

}  // namespace

TEST_CASE("the eigen oracle diagonalizes a symmetric matrix", "[pca]") {
    std::mt19937_64 rng(50);
    const DoubleMatrix b = oracle::random_doubles(6, 6, rng);
    const DoubleMatrix s = oracle::matmul(b, oracle::transpose(b));
    const auto e = oracle::symmetric_eigen(s);
    for (std::size_t k = 0; k < 6; ++k) {
        for (std::size_t i = 0; i < 6; ++i) {
            double sv = 0.0;
            for (std::size_t j = 0; j < 6; ++j) sv += s(i, j) * e.vectors(k, j);
            REQUIRE(std::abs(sv - e.values[k] * e.vectors(k, i)) <= 1e-9);
        }
    }
}

TEST_CASE("PCA components match a covariance eigen-decomposition", "[pca]") {
    std::mt19937_64 rng(51);
    const FloatMatrix x = correlated(200, 8, rng);
    const PcaModel m = fit_pca(x, 3);
    const auto ref = oracle::symmetric_eigen(oracle::covariance(x));
    REQUIRE(m.d_in() == 8);
    REQUIRE(m.d_out() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(m.explained_variance[k] == Catch::Approx(ref.values[k]).epsilon(1e-8));
        // up to sign
        double plus = 0.0, minus = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            plus = std::max(plus, std::abs(m.components(k, i) - ref.vectors(k, i)));
            minus = std::max(minus, std::abs(m.components(k, i) + ref.vectors(k, i)));
        }
        REQUIRE(std::min(plus, minus) <= 1e-6);
    }
}

TEST_CASE("PCA components are orthonormal with a fixed sign", "[pca]") {
    std::mt19937_64 rng(52);
    const std::tuple<std::size_t, std::size_t, std::size_t> cases[] = {
        {300, 16, 16}, {300, 16, 5}, {20, 64, 12}, {40, 64, 32}};
    for (auto [n, d, k] : cases) {
        CAPTURE(n, d, k);
        const FloatMatrix x = correlated(n, d, rng);
        const PcaModel m = fit_pca(x, k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) {
                REQUIRE(std::abs(dot_rows(m.components, a, b) - (a == b ? 1.0 : 0.0)) <= 1e-6);
            }
            // largest-magnitude entry is positive
            double big = 0.0;
            for (double v : m.components.row(a)) {
                if (std::abs(v) > std::abs(big)) big = v;
            }
            REQUIRE(big > 0.0);
        }
        for (std::size_t a = 1; a < k; ++a) REQUIRE(m.explained_variance[a] <= m.explained_variance[a - 1]);
    }
}

TEST_CASE("reconstruction error does not grow with d_out", "[pca]") {
    std::mt19937_64 rng(53);
    const FloatMatrix x = correlated(150, 12, rng);
    double previous = INFINITY;
    for (std::size_t k = 1; k <= 12; ++k) {
        const double e = reconstruction_mse(x, fit_pca(x, k));
        REQUIRE(e <= previous + 1e-9 * std::abs(previous));
        previous = e;
    }
    REQUIRE(previous <= 1e-6);
}

TEST_CASE("projections agree with the explicit component matrix", "[pca]") {
    std::mt19937_64 rng(54);
    const FloatMatrix x = correlated(100, 10, rng);
    const PcaModel m = fit_pca(x, 4);
    const FloatMatrix batch = oracle::random_floats(15, 10, rng);
    const FloatMatrix y = project_rows(batch, m);
    // oracle projections: C (v - mean)
    DoubleMatrix want(15, 4);
    for (std::size_t r = 0; r < 15; ++r) {
        for (std::size_t k = 0; k < 4; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < 10; ++i) s += m.components(k, i) * (batch(r, i) - m.mean[i]);
            want(r, k) = s;
        }
    }
    for (std::size_t a = 0; a < 15; ++a) {
        for (std::size_t b = 0; b < 15; ++b) {
            double got = 0.0, ref = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                got += static_cast<double>(y(a, k)) * y(b, k);
                ref += want(a, k) * want(b, k);
            }
            REQUIRE(std::abs(got - ref) <= 1e-6 * (1.0 + std::abs(ref)));
        }
    }
}

TEST_CASE("feature-level reduction shapes and global re-normalization", "[pca]") {
    std::mt19937_64 rng(55);
    const FloatMatrix x = correlated(120, 64, rng);
    const PcaModel m32 = fit_pca(x, 32);
    // k=8 words over 32-dim features gives 256-long VLAD vectors
    REQUIRE(8 * m32.d_out() == 256);
    REQUIRE(8 * fit_pca(x, 64).d_out() == 512);

    GlobalDescriptor g{"g", std::vector<float>(x.row(0).begin(), x.row(0).end()), false};
    const auto p = project_global(g, m32);
    REQUIRE(p.size() == 32);
    REQUIRE(p.normalized);
    double n2 = 0.0;
    for (float v : p.values) n2 += static_cast<double>(v) * v;
    REQUIRE(n2 == Catch::Approx(1.0).epsilon(1e-6));

    DescriptorSet set = oracle::random_set(9, 64, rng);
    set.sort_by_attention();
    const auto ps = project_set(set, m32);
    REQUIRE(ps.size() == 9);
    REQUIRE(ps.dim() == 32);
    for (std::size_t i = 0; i < 9; ++i) REQUIRE(ps.meta(i) == set.meta(i));
}

TEST_CASE("PCA errors and persistence", "[pca]") {
    std::mt19937_64 rng(56);
    const FloatMatrix x = correlated(30, 6, rng);
    auto kind = [](auto fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Construction;
    };
    REQUIRE(kind([&] { fit_pca(x, 0); }) == ErrorKind::Usage);
    REQUIRE(kind([&] { fit_pca(x, 7); }) == ErrorKind::Usage);
    REQUIRE(kind([&] { fit_pca(oracle::random_floats(2, 6, rng), 3); }) == ErrorKind::InsufficientData);
    const PcaModel m = fit_pca(x, 3);
    REQUIRE(kind([&] { project(std::vector<float>(5), m); }) == ErrorKind::Dimension);

    test::TempDir dir;
    save_pca(m, dir / "p.rpca");
    REQUIRE(load_pca(dir / "p.rpca") == m);
    const std::string bytes = encode_pca(m);
    REQUIRE(kind([&] { decode_pca(bytes.substr(0, 20), "p"); }) == ErrorKind::Format);
    REQUIRE(to_string(parse_pca_level("global")) == "global");
    REQUIRE(kind([] { parse_pca_level("bogus"); }) == ErrorKind::Usage);
}
