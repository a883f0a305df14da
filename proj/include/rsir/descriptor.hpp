#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rsir/matrix.hpp"

namespace rsir {

/// One attentive local feature. Positions are normalized to [0,1] so the same
/// format serves any image resolution.
struct LocalDescriptor {
    std::vector<float> vector;
    float x = 0.0f;
    float y = 0.0f;
    float scale = 1.0f;
    float attention = 0.0f;
};

struct DescriptorMeta {
    float attention = 0.0f;
    float scale = 1.0f;
    float x = 0.0f;
    float y = 0.0f;

    bool operator==(const DescriptorMeta&) const = default;
};

/// Non-owning view of one descriptor inside a DescriptorSet.
struct LocalDescriptorView {
    std::span<const float> vector;
    DescriptorMeta meta;
};

/// The local descriptors of one image, stored contiguously (count x d).
///
/// Loaded sets are ordered by attention, descending, ties kept in file order.
/// Sets built with add() are ordered once sort_by_attention() is called.
class DescriptorSet {
public:
    DescriptorSet() = default;
    explicit DescriptorSet(std::size_t d, std::string image_id = {}, std::string class_label = {});

    const std::string& image_id() const noexcept { return image_id_; }
    const std::string& class_label() const noexcept { return class_label_; }
    void set_image_id(std::string id) { image_id_ = std::move(id); }
    void set_class_label(std::string label) { class_label_ = std::move(label); }

    std::size_t dim() const noexcept { return vectors_.cols(); }
    std::size_t size() const noexcept { return meta_.size(); }
    bool empty() const noexcept { return meta_.empty(); }
    /// An empty set is valid but carries no information.
    bool degenerate() const noexcept { return empty(); }

    /// Throws Dimension on length mismatch and Data on a non-finite entry or
    /// out-of-range position, scale or attention.
    void add(std::span<const float> vector, const DescriptorMeta& meta);
    void add(const LocalDescriptor& descriptor);

    LocalDescriptorView at(std::size_t i) const { return {vectors_.row(i), meta_[i]}; }
    std::span<const float> vector(std::size_t i) const { return vectors_.row(i); }
    const DescriptorMeta& meta(std::size_t i) const { return meta_[i]; }
    const FloatMatrix& vectors() const noexcept { return vectors_; }

    /// Stable sort, attention descending.
    void sort_by_attention();
    bool attention_ordered() const noexcept;

    /// Copy of the first min(n, size()) descriptors.
    DescriptorSet head(std::size_t n) const;

    bool operator==(const DescriptorSet&) const = default;

private:
    std::string image_id_;
    std::string class_label_;
    FloatMatrix vectors_;
    std::vector<DescriptorMeta> meta_;
};

/// Binary layout (little-endian):
///   "RSIRDESC" | u16 version=1 | u32 d | u32 count |
///   count x [f32 attention, f32 scale, f32 x, f32 y, d x f32 vector]
inline constexpr char kDescriptorMagic[] = "RSIRDESC";
inline constexpr std::uint16_t kDescriptorVersion = 1;

std::string encode_descriptor_set(const DescriptorSet& set);

/// Parses a descriptor file image. `source` names the file in error messages.
/// The returned set takes its image id from `source`'s stem.
DescriptorSet decode_descriptor_set(std::string bytes, const std::string& source,
                                    std::size_t expected_d);

DescriptorSet load_descriptor_set(const std::filesystem::path& path, std::size_t expected_d);

/// Rejects sets that break the type invariants before anything is written.
void save_descriptor_set(const DescriptorSet& set, const std::filesystem::path& path);

/// Throws Data if a stored set violates an invariant (ordering included).
void check_descriptor_set(const DescriptorSet& set);

}  // namespace rsir
