#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsir/descriptor.hpp"
#include "rsir/manifest.hpp"

namespace rsir {

/// Parameters of a synthetic dataset with planted class structure.
///
/// Each class owns `prototypes_per_class` latent prototypes drawn from
/// N(0, class_separation^2) per element; a shared pool of background
/// prototypes feeds the distractors. Every image draws its own mixture weights
/// over its class's prototypes and a small image-wide offset, then samples
/// descriptors as prototype + offset + N(0, within_noise^2).
struct SynthSpec {
    std::size_t classes = 10;
    std::size_t images_per_class = 50;
    std::size_t descriptors_per_image = 300;
    std::size_t d = 64;
    double class_separation = 1.0;
    double within_noise = 1.5;
    /// Per-image offset, as a multiple of within_noise.
    double image_jitter = 0.5;
    /// Peak attention of a class descriptor sitting on its prototype.
    double attention_boost = 10.0;
    /// Fraction of each image's descriptors drawn from the background pool.
    double distractor_rate = 0.2;
    std::size_t prototypes_per_class = 8;
    std::size_t background_prototypes = 16;
    std::uint64_t seed = 7;
    std::string name = "synthetic";
};

/// Throws Usage when a count is zero or a real parameter is negative or
/// non-finite (class_separation and within_noise must be positive).
void check_synth_spec(const SynthSpec& spec);

struct SyntheticDataset {
    /// Image paths are "descriptors/<id>.rdesc".
    DatasetManifest manifest;
    /// In manifest order, attention-ordered.
    std::vector<DescriptorSet> sets;
};

/// Fully determined by the spec; images are generated in parallel from
/// per-image seeds.
SyntheticDataset generate_synthetic(const SynthSpec& spec);

/// Writes manifest.json and the descriptor files under `out_dir`. Returns the
/// manifest.
DatasetManifest write_synthetic_dataset(const SyntheticDataset& data, const std::filesystem::path& out_dir);

}  // namespace rsir
