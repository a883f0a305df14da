#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "rsir/error.hpp"
#include "rsir/expansion.hpp"

using namespace rsir;

namespace {

std::vector<float> unit(std::size_t d, std::mt19937_64& rng) {
    const FloatMatrix m = oracle::random_floats(1, d, rng);
    std::vector<float> v(m.row(0).begin(), m.row(0).end());
    l2_normalize(v);
    return v;
}

// Orthonormal columns from a QR factorization of a random matrix.
std::vector<std::vector<double>> orthonormal(std::size_t d, std::size_t m, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(d, m);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() * Eigen::MatrixXd::Identity(d, m);
    std::vector<std::vector<double>> cols(m, std::vector<double>(d));
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < d; ++i) cols[j][i] = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    return cols;
}

}  // namespace

TEST_CASE("psum of VLAD vectors is the VLAD of the union", "[expansion]") {
    std::mt19937_64 rng(71);
    const Codebook cb(oracle::random_doubles(4, 8, rng));
    const FloatMatrix p = oracle::random_floats(30, 8, rng);
    const FloatMatrix q = oracle::random_floats(25, 8, rng);
    FloatMatrix both = p;
    for (std::size_t r = 0; r < q.rows(); ++r) both.append_row(q.row(r));
    const std::vector<std::vector<double>> members{vlad_residuals(p, cb), vlad_residuals(q, cb)};
    const auto sum = psum(DescriptorGroup(std::span<const std::vector<double>>(members)));
    const auto whole = oracle::vlad(both, cb.centroids());
    for (std::size_t i = 0; i < sum.size(); ++i) REQUIRE(std::abs(sum[i] - whole[i]) <= 1e-6);
}

TEST_CASE("pinv memory vector of orthonormal members equals psum", "[expansion]") {
    std::mt19937_64 rng(72);
    for (std::size_t m = 1; m <= 8; ++m) {
        const auto cols = orthonormal(64, m, rng);
        const DescriptorGroup g{std::span<const std::vector<double>>(cols)};
        const auto a = psum(g);
        const auto b = pinv_mv(g);
        REQUIRE_FALSE(b.degenerate);
        for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(std::abs(a[i] - b.values[i]) <= 1e-6);
    }
}

TEST_CASE("pinv memory vector of a repeated member", "[expansion]") {
    std::mt19937_64 rng(73);
    const auto v = unit(16, rng);
    const std::vector<std::vector<float>> members{v, v};
    const DescriptorGroup g{std::span<const std::vector<float>>(members)};
    const auto mv = pinv_mv(g);
    const auto ps = psum(g);
    // G = [v v] has the single singular triple (sqrt(2)|v|, v/|v|, [1 1]/sqrt(2)),
    // so G^+ = [1 1]^T v^T / (2|v|^2) and the row sum is v/|v|^2. |v| is 1 only to float precision.
    double n2 = 0.0;
    for (float x : v) n2 += static_cast<double>(x) * x;
    for (std::size_t i = 0; i < 16; ++i) {
        REQUIRE(std::abs(mv.values[i] - static_cast<double>(v[i]) / n2) <= 1e-12);
        REQUIRE(std::abs(mv.values[i] - ps[i] / (2.0 * n2)) <= 1e-12);
    }
}

TEST_CASE("pinv of a single member is v over its squared norm", "[expansion]") {
    const std::vector<std::vector<double>> members{{3.0, 0.0, 4.0}};
    const auto mv = pinv_mv(DescriptorGroup{std::span<const std::vector<double>>(members)});
    REQUIRE(mv.values[0] == Catch::Approx(3.0 / 25));
    REQUIRE(mv.values[1] == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(mv.values[2] == Catch::Approx(4.0 / 25));
}

TEST_CASE("pinv down-weights a direction shared by members", "[expansion]") {
    // e1 appears twice, e2 once: psum weights e1 twice as much, pinv weights them equally
    const std::vector<std::vector<double>> members{{1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const DescriptorGroup g{std::span<const std::vector<double>>(members)};
    const auto ps = psum(g);
    const auto mv = pinv_mv(g);
    REQUIRE(ps[0] == 2.0);
    REQUIRE(ps[1] == 1.0);
    REQUIRE(mv.values[0] == Catch::Approx(1.0));
    REQUIRE(mv.values[1] == Catch::Approx(1.0));
}

TEST_CASE("descriptor groups reject bad members", "[expansion]") {
    const std::vector<std::vector<float>> uneven{{1, 2}, {1, 2, 3}};
    REQUIRE_THROWS_AS(DescriptorGroup{std::span<const std::vector<float>>(uneven)}, Error);
    const std::vector<std::vector<float>> none;
    REQUIRE_THROWS_AS(DescriptorGroup{std::span<const std::vector<float>>(none)}, Error);
    const std::vector<std::vector<double>> nan{{1, NAN}};
    REQUIRE_THROWS_AS(DescriptorGroup{std::span<const std::vector<double>>(nan)}, Error);

    const std::vector<std::vector<double>> zero{{0, 0}, {0, 0}};
    const auto mv = pinv_mv(DescriptorGroup{std::span<const std::vector<double>>(zero)});
    REQUIRE(mv.degenerate);
    REQUIRE(mv.values == std::vector<double>{0, 0});
}

TEST_CASE("expand_query with psum is the normalized sum", "[expansion]") {
    std::mt19937_64 rng(74);
    const GlobalDescriptor q{"q", unit(12, rng), true};
    const std::vector<GlobalDescriptor> top{{"a", unit(12, rng), true}, {"b", unit(12, rng), true},
                                            {"c", unit(12, rng), true}};
    const auto e = expand_query(q, top, ExpansionMethod::PSum);
    std::vector<double> want(12);
    double n = 0.0;
    for (std::size_t i = 0; i < 12; ++i) {
        want[i] = static_cast<double>(q.values[i]) + top[0].values[i] + top[1].values[i] + top[2].values[i];
        n += want[i] * want[i];
    }
    n = std::sqrt(n);
    REQUIRE(e.normalized);
    REQUIRE(e.image_id == "q");
    for (std::size_t i = 0; i < 12; ++i) REQUIRE(std::abs(e.values[i] - want[i] / n) <= 1e-6);

    // no candidates or no method: unchanged
    REQUIRE(expand_query(q, {}, ExpansionMethod::PInv).values == q.values);
    REQUIRE(expand_query(q, top, ExpansionMethod::None).values == q.values);
}

TEST_CASE("query_with_expansion returns top_k entries without the query", "[expansion]") {
    std::mt19937_64 rng(75);
    std::vector<GlobalDescriptor> g;
    for (int i = 0; i < 60; ++i) g.push_back({"img" + std::to_string(i), unit(16, rng), true});
    const Index index = build_index(g);
    for (auto method : {ExpansionMethod::None, ExpansionMethod::PSum, ExpansionMethod::PInv}) {
        ExpansionOptions opts;
        opts.method = method;
        const RankedList r = query_with_expansion(index, g[5], opts);
        REQUIRE(r.size() == 20);
        for (const auto& e : r) REQUIRE(e.image_id != "img5");

        opts.leave_one_out = false;
        const RankedList self = query_with_expansion(index, g[5], opts);
        if (method == ExpansionMethod::None) REQUIRE(self.front().image_id == "img5");
    }
    REQUIRE(parse_expansion("pinv") == ExpansionMethod::PInv);
    REQUIRE(to_string(ExpansionMethod::PSum) == "psum");
    REQUIRE_THROWS_AS(parse_expansion("mean"), Error);
}
