#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rsir/descriptor.hpp"
#include "rsir/matrix.hpp"

namespace rsir {

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::uint32_t iterations = 0;
    bool converged = false;
    double inertia = 0.0;

    bool operator==(const TrainingMeta&) const = default;
};

/// k visual words of dimension d. Centroids are held in double precision; the
/// file format stores them as f32.
class Codebook {
public:
    Codebook() = default;
    explicit Codebook(DoubleMatrix centroids, TrainingMeta meta = {});

    std::size_t k() const noexcept { return centroids_.rows(); }
    std::size_t dim() const noexcept { return centroids_.cols(); }
    std::span<const double> centroid(std::size_t i) const noexcept { return centroids_.row(i); }
    const DoubleMatrix& centroids() const noexcept { return centroids_; }
    const TrainingMeta& meta() const noexcept { return meta_; }

    bool operator==(const Codebook&) const = default;

private:
    DoubleMatrix centroids_;
    TrainingMeta meta_;
};

/// Index of the nearest centroid by Euclidean distance; ties go to the lowest
/// index. Throws Dimension on length mismatch.
std::size_t assign(std::span<const float> feature, const Codebook& codebook);

/// The first min(n_per_image, size) descriptors of every set (sets are
/// attention-ordered, so these are the most attentive ones), concatenated in
/// input order. Throws InsufficientData when the result would be empty.
FloatMatrix select_codebook_training_features(std::span<const DescriptorSet> sets,
                                              std::size_t n_per_image);

struct KMeansOptions {
    std::size_t k = 16;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    double tol = 1e-4;
};

struct KMeansResult {
    Codebook codebook;
    /// Inertia after each assignment step; non-increasing.
    std::vector<double> inertia_history;
    std::vector<std::uint32_t> assignments;
};

/// Lloyd iterations from a k-means++ seeding. Stops after max_iters updates or
/// when one update lowers inertia by less than tol (relative). An empty cluster
/// is re-seeded at the point farthest from its assigned centroid.
KMeansResult run_kmeans(const FloatMatrix& features, const KMeansOptions& options);

Codebook train_codebook(const FloatMatrix& features, std::size_t k, std::uint64_t seed,
                        std::size_t max_iters = 100, double tol = 1e-4);

/// Sum of squared distances from each feature to its nearest centroid.
double inertia(const FloatMatrix& features, const Codebook& codebook);

/// "RSIRCDBK" | u16 version=1 | u32 k | u32 d | k*d f32 |
/// u64 seed | u32 iterations | u8 converged | f64 inertia
inline constexpr char kCodebookMagic[] = "RSIRCDBK";
inline constexpr std::uint16_t kCodebookVersion = 1;

std::string encode_codebook(const Codebook& codebook);
Codebook decode_codebook(std::string bytes, const std::string& source);
void save_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace rsir
