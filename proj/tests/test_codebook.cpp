#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "rsir/codebook.hpp"
#include "rsir/error.hpp"
#include "temp_dir.hpp"

using namespace rsir;

namespace {

std::vector<DescriptorSet> sorted_sets(std::size_t images, std::size_t per_image, std::size_t d,
                                       std::mt19937_64& rng) {
    std::vector<DescriptorSet> sets;
    for (std::size_t i = 0; i < images; ++i) {
        auto s = oracle::random_set(per_image, d, rng, "img" + std::to_string(i));
        s.sort_by_attention();
        sets.push_back(std::move(s));
    }
    return sets;
}

}  // namespace

TEST_CASE("codebook training selection takes the most attentive features", "[codebook]") {
    std::mt19937_64 rng(21);
    const auto sets = sorted_sets(5, 12, 4, rng);
    const FloatMatrix sel = select_codebook_training_features(sets, 10);
    // enumerate: 10 from each of 5 images
    std::size_t expected = 0;
    for (const auto& s : sets) {
        for (std::size_t i = 0; i < s.size() && i < 10; ++i) ++expected;
    }
    REQUIRE(expected == 50);
    REQUIRE(sel.rows() == expected);
    std::size_t row = 0;
    for (const auto& s : sets) {
        for (std::size_t i = 0; i < 10; ++i, ++row) {
            for (std::size_t j = 0; j < 4; ++j) REQUIRE(sel(row, j) == s.vector(i)[j]);
        }
    }

    SECTION("small images contribute what they have") {
        auto few = sorted_sets(3, 4, 4, rng);
        REQUIRE(select_codebook_training_features(few, 10).rows() == 12);
    }
    SECTION("no features at all") {
        std::vector<DescriptorSet> empty{DescriptorSet(4)};
        REQUIRE_THROWS_AS(select_codebook_training_features(empty, 10), Error);
    }
}

TEST_CASE("2,100 images at 100 per image stay within 210,000 features", "[codebook]") {
    // Count-only check at full scale would need 2,100 x 300 x 1024 floats; use d=1.
    std::mt19937_64 rng(22);
    const auto sets = sorted_sets(2100, 120, 1, rng);
    REQUIRE(select_codebook_training_features(sets, 100).rows() == 210000);
}

TEST_CASE("assign matches a brute-force nearest-centroid scan", "[codebook]") {
    std::mt19937_64 rng(23);
    const Codebook cb(oracle::random_doubles(16, 24, rng));
    const FloatMatrix f = oracle::random_floats(1000, 24, rng);
    for (std::size_t i = 0; i < f.rows(); ++i) {
        REQUIRE(assign(f.row(i), cb) == oracle::nearest_centroid(f.row(i), cb.centroids()));
    }
}

TEST_CASE("assign breaks ties toward the lowest index", "[codebook]") {
    DoubleMatrix c(3, 2, {1, 0, -1, 0, 1, 0});
    const Codebook cb(c);
    const std::vector<float> origin{0, 0};
    REQUIRE(assign(origin, cb) == 0);
    const std::vector<float> right{1, 0};
    REQUIRE(assign(right, cb) == 0);
    REQUIRE_THROWS_AS(assign(std::vector<float>{1, 0, 0}, cb), Error);
}

TEST_CASE("k-means inertia never increases", "[codebook]") {
    std::mt19937_64 rng(24);
    for (std::size_t k : {1, 2, 4, 8, 16}) {
        const FloatMatrix f = oracle::random_floats(600, 8, rng);
        const auto res = run_kmeans(f, {k, 5, 100, 0.0});
        REQUIRE(res.inertia_history.size() >= 1);
        for (std::size_t i = 1; i < res.inertia_history.size(); ++i) {
            REQUIRE(res.inertia_history[i] <= res.inertia_history[i - 1]);
        }
        REQUIRE(res.codebook.meta().inertia == res.inertia_history.back());
        REQUIRE(inertia(f, res.codebook) == Catch::Approx(res.inertia_history.back()).epsilon(1e-12));
    }
}

TEST_CASE("k=1 centroid is the sample mean", "[codebook]") {
    std::mt19937_64 rng(25);
    const FloatMatrix f = oracle::random_floats(777, 13, rng, 3.0f);
    const Codebook cb = train_codebook(f, 1, 0);
    for (std::size_t j = 0; j < 13; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < f.rows(); ++r) mean += f(r, j);
        mean /= static_cast<double>(f.rows());
        REQUIRE(std::abs(cb.centroid(0)[j] - mean) <= 1e-9);
    }
}

TEST_CASE("k-means is deterministic under a seed", "[codebook]") {
    std::mt19937_64 rng(26);
    const FloatMatrix f = oracle::random_floats(500, 6, rng);
    const auto a = run_kmeans(f, {8, 42});
    const auto b = run_kmeans(f, {8, 42});
    REQUIRE(a.codebook == b.codebook);
    REQUIRE(a.assignments == b.assignments);
    REQUIRE(a.inertia_history == b.inertia_history);
    const auto c = run_kmeans(f, {8, 43});
    REQUIRE_FALSE(c.codebook == a.codebook);
}

TEST_CASE("k=2 on planted clusters reaches the best 2-partition", "[codebook]") {
    std::mt19937_64 rng(27);
    std::normal_distribution<float> g(0.0f, 0.3f);
    FloatMatrix f(20, 2);
    for (std::size_t i = 0; i < 20; ++i) {
        const float cx = i < 10 ? -3.0f : 4.0f;
        f(i, 0) = cx + g(rng);
        f(i, 1) = (i < 10 ? 1.0f : -2.0f) + g(rng);
    }
    // exhaustive search over every 2-partition
    double best = INFINITY;
    std::array<std::array<double, 2>, 2> best_means{};
    for (std::uint32_t mask = 1; mask < (1u << 20) - 1; ++mask) {
        std::array<std::array<double, 2>, 2> sum{};
        std::array<int, 2> cnt{};
        for (std::size_t i = 0; i < 20; ++i) {
            const int side = (mask >> i) & 1u;
            sum[side][0] += f(i, 0);
            sum[side][1] += f(i, 1);
            ++cnt[side];
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            const int side = (mask >> i) & 1u;
            for (int j = 0; j < 2; ++j) {
                const double diff = f(i, j) - sum[side][j] / cnt[side];
                cost += diff * diff;
            }
        }
        if (cost < best) {
            best = cost;
            for (int s = 0; s < 2; ++s) {
                for (int j = 0; j < 2; ++j) best_means[s][j] = sum[s][j] / cnt[s];
            }
        }
    }
    const Codebook cb = train_codebook(f, 2, 3);
    for (const auto& m : best_means) {
        bool matched = false;
        for (std::size_t c = 0; c < 2; ++c) {
            matched = matched || (std::abs(cb.centroid(c)[0] - m[0]) <= 1e-6 &&
                                  std::abs(cb.centroid(c)[1] - m[1]) <= 1e-6);
        }
        REQUIRE(matched);
    }
    REQUIRE(inertia(f, cb) == Catch::Approx(best).epsilon(1e-9));
}

TEST_CASE("k=16 at d=1024 gives 16 centroids of length 1024", "[codebook]") {
    std::mt19937_64 rng(28);
    const FloatMatrix f = oracle::random_floats(400, 1024, rng);
    const Codebook cb = train_codebook(f, 16, 1, 5);
    REQUIRE(cb.k() == 16);
    REQUIRE(cb.dim() == 1024);
}

TEST_CASE("k-means edge cases", "[codebook]") {
    std::mt19937_64 rng(29);
    SECTION("fewer features than k") {
        const FloatMatrix f = oracle::random_floats(3, 2, rng);
        try {
            run_kmeans(f, {4});
            FAIL("expected insufficient data");
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::InsufficientData);
        }
    }
    SECTION("duplicate points reach zero inertia") {
        FloatMatrix f(0, 2);
        for (int i = 0; i < 30; ++i) f.append_row(std::vector<float>{1.0f, 1.0f});
        f.append_row(std::vector<float>{5.0f, 5.0f});
        const auto res = run_kmeans(f, {3, 0});
        REQUIRE(res.codebook.k() == 3);
        REQUIRE(res.inertia_history.back() == 0.0);
    }
    SECTION("non-finite features") {
        FloatMatrix f = oracle::random_floats(10, 2, rng);
        f(3, 1) = std::numeric_limits<float>::infinity();
        REQUIRE_THROWS_AS(run_kmeans(f, {2}), Error);
    }
}

TEST_CASE("codebook file round-trip and corruption", "[codebook]") {
    std::mt19937_64 rng(30);
    const FloatMatrix f = oracle::random_floats(200, 7, rng);
    const Codebook cb = train_codebook(f, 4, 9);
    test::TempDir dir;
    save_codebook(cb, dir / "cb.rcbk");
    const Codebook back = load_codebook(dir / "cb.rcbk");
    REQUIRE(back.meta() == cb.meta());
    for (std::size_t i = 0; i < cb.k(); ++i) {
        for (std::size_t j = 0; j < cb.dim(); ++j) {
            REQUIRE(back.centroid(i)[j] == static_cast<double>(static_cast<float>(cb.centroid(i)[j])));
        }
    }
    REQUIRE(encode_codebook(back) == encode_codebook(cb));

    const std::string bytes = encode_codebook(cb);
    REQUIRE_THROWS_AS(decode_codebook(bytes.substr(0, bytes.size() - 1), "x"), Error);
    REQUIRE_THROWS_AS(decode_codebook("RSIRDESC" + bytes.substr(8), "x"), Error);
}
