#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rsir/codebook.hpp"
#include "rsir/descriptor.hpp"
#include "rsir/matrix.hpp"

namespace rsir {

/// Image-level descriptor: the k per-word residual sums, concatenated in word
/// order, optionally L2-normalized.
struct GlobalDescriptor {
    std::string image_id;
    std::vector<float> values;
    bool normalized = false;

    std::size_t size() const noexcept { return values.size(); }
};

inline constexpr std::size_t kDefaultTopAttentive = 300;

/// The min(n, size) most attentive descriptors. Every kept attention is >= every
/// dropped one; an unordered input is sorted (stably) first.
DescriptorSet select_top_attentive(const DescriptorSet& set, std::size_t n = kDefaultTopAttentive);

/// Unnormalized VLAD in double precision: block i (length d) is the sum of
/// (f - c_i) over the features whose nearest word is i; empty words stay zero.
/// Throws Dimension if the feature and codebook dimensions differ.
std::vector<double> vlad_residuals(const FloatMatrix& features, const Codebook& codebook);
std::vector<double> vlad_residuals(const DescriptorSet& set, const Codebook& codebook);

/// Divides by the L2 norm; a zero vector stays zero and `normalized` is false.
GlobalDescriptor make_global(std::string image_id, std::span<const double> values, bool normalize);

GlobalDescriptor aggregate_vlad(const DescriptorSet& set, const Codebook& codebook,
                                bool normalize = true);
GlobalDescriptor aggregate_vlad(const FloatMatrix& features, const Codebook& codebook,
                                std::string image_id, bool normalize = true);

/// In-place L2 normalization of a float vector (double accumulation). Returns
/// false, leaving the input untouched, when the norm is zero.
bool l2_normalize(std::span<float> values);

}  // namespace rsir
