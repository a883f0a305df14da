#include "rsir/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "binary_io.hpp"
#include "rsir/error.hpp"
#include "rsir/parallel.hpp"
#include "rsir/simd/kernels.hpp"

namespace rsir {
namespace {

struct Nearest {
    std::uint32_t index;
    double distance;  // squared
};

Nearest nearest(std::span<const float> feature, const DoubleMatrix& centroids) {
    const auto& kern = simd::active();
    Nearest best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < centroids.rows(); ++i) {
        const double d = kern.squared_l2_fd(feature.data(), centroids.row(i).data(), feature.size());
        if (d < best.distance) best = {static_cast<std::uint32_t>(i), d};
    }
    return best;
}

void assign_all(const FloatMatrix& features, const DoubleMatrix& centroids,
                std::vector<std::uint32_t>& labels, std::vector<double>& distances) {
    labels.resize(features.rows());
    distances.resize(features.rows());
    parallel_for(features.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto n = nearest(features.row(i), centroids);
            labels[i] = n.index;
            distances[i] = n.distance;
        }
    });
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

void copy_row(std::span<const float> from, std::span<double> to) {
    std::copy(from.begin(), from.end(), to.begin());
}

DoubleMatrix seed_plus_plus(const FloatMatrix& features, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = features.rows();
    DoubleMatrix centroids(k, features.cols());
    std::vector<bool> chosen(n, false);

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t first = pick(rng);
    copy_row(features.row(first), centroids.row(0));
    chosen[first] = true;

    const auto& kern = simd::active();
    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        min_d2[i] = kern.squared_l2_fd(features.row(i).data(), centroids.row(0).data(), features.cols());
    }

    for (std::size_t c = 1; c < k; ++c) {
        const double total = sum(min_d2);
        std::size_t next = n;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            const double target = u(rng);
            double running = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (min_d2[i] <= 0.0) continue;
                running += min_d2[i];
                next = i;
                if (running >= target) break;
            }
        }
        if (next == n) {
            // every point coincides with a chosen centroid
            next = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
            if (next == n) next = 0;
        }
        chosen[next] = true;
        copy_row(features.row(next), centroids.row(c));
        for (std::size_t i = 0; i < n; ++i) {
            const double d = kern.squared_l2_fd(features.row(i).data(), centroids.row(c).data(),
                                                features.cols());
            min_d2[i] = std::min(min_d2[i], d);
        }
    }
    return centroids;
}

DoubleMatrix update_centroids(const FloatMatrix& features, const std::vector<std::uint32_t>& labels,
                              std::vector<double> distances, std::size_t k) {
    const std::size_t d = features.cols();
    DoubleMatrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto acc = sums.row(labels[i]);
        const auto f = features.row(i);
        for (std::size_t j = 0; j < d; ++j) acc[j] += f[j];
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        auto row = sums.row(c);
        if (counts[c] > 0) {
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (double& x : row) x *= inv;
            continue;
        }
        const auto far = static_cast<std::size_t>(
            std::max_element(distances.begin(), distances.end()) - distances.begin());
        copy_row(features.row(far), row);
        distances[far] = -1.0;
    }
    return sums;
}

void check_finite(const FloatMatrix& features) {
    for (float x : features.values()) {
        if (!std::isfinite(x)) fail(ErrorKind::Data, "non-finite value in training features");
    }
}

}  // namespace

Codebook::Codebook(DoubleMatrix centroids, TrainingMeta meta)
    : centroids_(std::move(centroids)), meta_(meta) {
    if (centroids_.rows() == 0 || centroids_.cols() == 0) {
        fail(ErrorKind::Construction, "codebook needs k >= 1 and d >= 1");
    }
    for (double x : centroids_.values()) {
        if (!std::isfinite(x)) fail(ErrorKind::Data, "non-finite centroid value");
    }
}

std::size_t assign(std::span<const float> feature, const Codebook& codebook) {
    if (feature.size() != codebook.dim()) {
        fail(ErrorKind::Dimension, "feature dimension mismatch: expected " +
                                       std::to_string(codebook.dim()) + ", found " +
                                       std::to_string(feature.size()));
    }
    return nearest(feature, codebook.centroids()).index;
}

FloatMatrix select_codebook_training_features(std::span<const DescriptorSet> sets,
                                              std::size_t n_per_image) {
    std::size_t total = 0;
    std::size_t d = 0;
    for (const auto& s : sets) {
        const std::size_t take = std::min(n_per_image, s.size());
        if (take > 0) {
            if (d != 0 && s.dim() != d) {
                fail(ErrorKind::Dimension, "descriptor sets disagree on dimension");
            }
            d = s.dim();
        }
        total += take;
    }
    if (total == 0) fail(ErrorKind::InsufficientData, "no features available for codebook training");
    FloatMatrix out(0, d);
    out.reserve_rows(total);
    for (const auto& s : sets) {
        const std::size_t take = std::min(n_per_image, s.size());
        for (std::size_t i = 0; i < take; ++i) out.append_row(s.vector(i));
    }
    return out;
}

KMeansResult run_kmeans(const FloatMatrix& features, const KMeansOptions& options) {
    if (options.k == 0) fail(ErrorKind::Usage, "k must be at least 1");
    if (features.rows() < options.k) {
        fail(ErrorKind::InsufficientData, "need at least k=" + std::to_string(options.k) +
                                              " features, have " + std::to_string(features.rows()));
    }
    if (features.cols() == 0) fail(ErrorKind::Dimension, "features have zero dimension");
    check_finite(features);

    std::mt19937_64 rng(options.seed);
    DoubleMatrix centroids = seed_plus_plus(features, options.k, rng);

    KMeansResult result;
    std::vector<std::uint32_t> labels;
    std::vector<double> distances;
    assign_all(features, centroids, labels, distances);
    double current = sum(distances);
    result.inertia_history.push_back(current);

    TrainingMeta meta;
    meta.seed = options.seed;
    for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
        DoubleMatrix next = update_centroids(features, labels, distances, options.k);
        std::vector<std::uint32_t> next_labels;
        std::vector<double> next_distances;
        assign_all(features, next, next_labels, next_distances);
        const double updated = sum(next_distances);
        if (updated > current) {
            // Only reachable through rounding once converged; keep the previous state.
            meta.converged = true;
            break;
        }
        centroids = std::move(next);
        labels = std::move(next_labels);
        distances = std::move(next_distances);
        result.inertia_history.push_back(updated);
        meta.iterations = static_cast<std::uint32_t>(iter);
        const double improvement = current > 0.0 ? (current - updated) / current : 0.0;
        current = updated;
        if (improvement < options.tol) {
            meta.converged = true;
            break;
        }
    }
    meta.inertia = current;
    result.codebook = Codebook(std::move(centroids), meta);
    result.assignments = std::move(labels);
    return result;
}

Codebook train_codebook(const FloatMatrix& features, std::size_t k, std::uint64_t seed,
                        std::size_t max_iters, double tol) {
    return run_kmeans(features, {k, seed, max_iters, tol}).codebook;
}

double inertia(const FloatMatrix& features, const Codebook& codebook) {
    std::vector<std::uint32_t> labels;
    std::vector<double> distances;
    assign_all(features, codebook.centroids(), labels, distances);
    return sum(distances);
}

std::string encode_codebook(const Codebook& codebook) {
    io::ByteWriter w;
    w.bytes({kCodebookMagic, 8});
    w.put<std::uint16_t>(kCodebookVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(codebook.k()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(codebook.dim()));
    for (double x : codebook.centroids().values()) w.put(static_cast<float>(x));
    const auto& m = codebook.meta();
    w.put<std::uint64_t>(m.seed);
    w.put<std::uint32_t>(m.iterations);
    w.put<std::uint8_t>(m.converged ? 1 : 0);
    w.put<double>(m.inertia);
    return w.buffer();
}

Codebook decode_codebook(std::string bytes, const std::string& source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic({kCodebookMagic, 8});
    const auto version = r.get<std::uint16_t>("version");
    if (version != kCodebookVersion) {
        fail(ErrorKind::Format, source + ": unsupported codebook version " + std::to_string(version));
    }
    const auto k = r.get<std::uint32_t>("k");
    const auto d = r.get<std::uint32_t>("d");
    if (k == 0 || d == 0) fail(ErrorKind::Format, source + ": codebook with k=0 or d=0");
    std::vector<float> raw(static_cast<std::size_t>(k) * d);
    r.get_all(std::span<float>(raw), "centroids");
    TrainingMeta meta;
    meta.seed = r.get<std::uint64_t>("seed");
    meta.iterations = r.get<std::uint32_t>("iterations");
    meta.converged = r.get<std::uint8_t>("converged") != 0;
    meta.inertia = r.get<double>("inertia");
    r.expect_end();
    return Codebook(DoubleMatrix(k, d, std::vector<double>(raw.begin(), raw.end())), meta);
}

void save_codebook(const Codebook& codebook, const std::filesystem::path& path) {
    io::write_file(path, encode_codebook(codebook));
}

Codebook load_codebook(const std::filesystem::path& path) {
    return decode_codebook(io::read_file(path), path.string());
}

}  // namespace rsir
