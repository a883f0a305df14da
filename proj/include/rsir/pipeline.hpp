#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rsir/codebook.hpp"
#include "rsir/descriptor.hpp"
#include "rsir/engine.hpp"
#include "rsir/pca.hpp"
#include "rsir/vlad.hpp"

namespace rsir {

/// Training and encoding settings shared by the CLI and the test harnesses.
struct PipelineConfig {
    std::size_t k = 16;
    std::size_t codebook_per_image = 100;
    std::size_t top_attentive = kDefaultTopAttentive;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    double tol = 1e-4;
    PcaLevel pca_level = PcaLevel::None;
    std::size_t pca_dim = 0;
};

/// A codebook and, optionally, the PCA model applied before it (feature
/// level) or after it (global level).
struct Models {
    Codebook codebook;
    PcaLevel pca_level = PcaLevel::None;
    std::optional<PcaModel> pca;
};

/// Feature level: PCA is fitted on the codebook training features and the
/// codebook is trained in the reduced space. Global level: the codebook is
/// trained first and PCA is fitted on the normalized VLAD vectors of all sets.
Models train_models(std::span<const DescriptorSet> sets, const PipelineConfig& config);

/// Throws Dimension when the PCA and codebook spaces do not line up.
void check_models(const Models& models);

/// Top-attentive selection, optional feature projection, VLAD, optional
/// global projection. Always L2-normalized (a zero VLAD stays zero).
GlobalDescriptor encode_image(const DescriptorSet& set, const Models& models,
                              std::size_t top_attentive = kDefaultTopAttentive);

/// encode_image over every set, in parallel, order kept.
std::vector<GlobalDescriptor> encode_images(std::span<const DescriptorSet> sets, const Models& models,
                                            std::size_t top_attentive = kDefaultTopAttentive);

/// Index over encode_images(sets), labelled with each set's class.
Index build_dataset_index(std::span<const DescriptorSet> sets, const Models& models,
                          std::size_t top_attentive = kDefaultTopAttentive);

}  // namespace rsir
