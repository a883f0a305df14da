#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsir/manifest.hpp"
#include "rsir/matrix.hpp"
#include "rsir/vlad.hpp"

namespace rsir {

/// Immutable database of global descriptors, one row per image.
class Index {
public:
    Index() = default;

    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    std::size_t dim() const noexcept { return matrix_.cols(); }

    /// File-header split of dim() into k words of length d (k * d == dim()).
    std::size_t words() const noexcept { return words_; }
    std::size_t word_dim() const noexcept { return words_ == 0 ? 0 : dim() / words_; }

    const std::string& id(std::size_t row) const { return ids_[row]; }
    const std::string& label(std::size_t row) const { return labels_[row]; }
    std::span<const float> row(std::size_t r) const { return matrix_.row(r); }
    const FloatMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    std::optional<std::size_t> find(const std::string& image_id) const;

    /// Sets class labels from a manifest; rows missing from it keep "".
    void attach_labels(const DatasetManifest& manifest);

    friend Index build_index(std::span<const GlobalDescriptor>, std::span<const std::string>,
                             std::size_t);
    friend Index decode_index(std::string, const std::string&);

private:
    std::vector<std::string> ids_;
    std::vector<std::string> labels_;
    FloatMatrix matrix_;
    std::size_t words_ = 1;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// Rows in input order. `labels` may be empty (all labels ""), otherwise it
/// must match `globals` in length. `words` only affects the file header and
/// must divide the descriptor length (0 means 1). Throws Construction on
/// duplicate ids and Dimension on non-uniform lengths.
Index build_index(std::span<const GlobalDescriptor> globals, std::span<const std::string> labels = {},
                  std::size_t words = 1);

struct RankedEntry {
    std::string image_id;
    std::string class_label;
    double distance = 0.0;
    std::size_t row = 0;
};

/// Distances non-decreasing, ties in ascending row order, ids unique.
using RankedList = std::vector<RankedEntry>;

/// Exhaustive Euclidean ranking of every row (except `exclude_row`), top_k
/// kept. Throws EmptyIndex, Dimension, or Usage (top_k == 0).
RankedList search(const Index& index, std::span<const float> query, std::size_t top_k,
                  std::optional<std::size_t> exclude_row = std::nullopt);

/// "RSIRVLAD" | u16 version=1 | u32 count | u32 k | u32 d |
/// count x [u32 id length, id bytes, k*d f32]
/// Labels are not stored; use attach_labels after loading.
inline constexpr char kIndexMagic[] = "RSIRVLAD";
inline constexpr std::uint16_t kIndexVersion = 1;

std::string encode_index(const Index& index);
Index decode_index(std::string bytes, const std::string& source);
void save_index(const Index& index, const std::filesystem::path& path);
Index load_index(const std::filesystem::path& path);

struct TimingCell {
    std::size_t size = 0;
    std::size_t dim = 0;
    double median_ms = 0.0;
    double mean_ms = 0.0;
};

struct TimingReport {
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> dims;
    std::size_t repetitions = 0;
    std::vector<TimingCell> cells;  // sizes-major

    const TimingCell& cell(std::size_t size, std::size_t dim) const;

    /// Rows are database sizes, columns descriptor sizes, values median ms.
    std::string to_table() const;
    std::string to_json() const;
};

/// Wall time of one full query (top 20) against random unit-norm indices of
/// each (size, dim). Each repetition times a batch of back-to-back queries
/// long enough to be well above timer resolution and reports the per-query
/// average; one warm-up batch precedes the measured ones.
TimingReport benchmark_search(std::span<const std::size_t> sizes, std::span<const std::size_t> dims,
                              std::size_t repetitions, std::uint64_t seed = 0);

}  // namespace rsir
