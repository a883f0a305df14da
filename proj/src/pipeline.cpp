#include "rsir/pipeline.hpp"

#include "rsir/error.hpp"
#include "rsir/parallel.hpp"

namespace rsir {

Models train_models(std::span<const DescriptorSet> sets, const PipelineConfig& config) {
    if (config.pca_level != PcaLevel::None && config.pca_dim == 0) {
        fail(ErrorKind::Usage, "PCA requested without a target dimension");
    }
    Models models;
    models.pca_level = config.pca_level;
    FloatMatrix training = select_codebook_training_features(sets, config.codebook_per_image);

    if (config.pca_level == PcaLevel::Feature) {
        models.pca = fit_pca(training, config.pca_dim);
        training = project_rows(training, *models.pca);
    }
    models.codebook = train_codebook(training, config.k, config.seed, config.max_iters, config.tol);

    if (config.pca_level == PcaLevel::Global) {
        Models plain;
        plain.codebook = models.codebook;
        const auto globals = encode_images(sets, plain, config.top_attentive);
        FloatMatrix rows(0, models.codebook.k() * models.codebook.dim());
        rows.reserve_rows(globals.size());
        for (const auto& g : globals) rows.append_row(g.values);
        models.pca = fit_pca(rows, config.pca_dim);
    }
    return models;
}

void check_models(const Models& models) {
    if (models.pca_level == PcaLevel::None) return;
    if (!models.pca) fail(ErrorKind::Usage, "PCA level set but no PCA model given");
    const auto& pca = *models.pca;
    if (models.pca_level == PcaLevel::Feature && pca.d_out() != models.codebook.dim()) {
        fail(ErrorKind::Dimension, "feature PCA outputs " + std::to_string(pca.d_out()) +
                                       " dims but the codebook has " +
                                       std::to_string(models.codebook.dim()));
    }
    if (models.pca_level == PcaLevel::Global &&
        pca.d_in() != models.codebook.k() * models.codebook.dim()) {
        fail(ErrorKind::Dimension, "global PCA expects " + std::to_string(pca.d_in()) +
                                       " inputs but VLAD vectors have " +
                                       std::to_string(models.codebook.k() * models.codebook.dim()));
    }
}

GlobalDescriptor encode_image(const DescriptorSet& set, const Models& models, std::size_t top_attentive) {
    DescriptorSet top = select_top_attentive(set, top_attentive);
    if (models.pca_level == PcaLevel::Feature) top = project_set(top, *models.pca);
    GlobalDescriptor g = aggregate_vlad(top, models.codebook, true);
    if (models.pca_level == PcaLevel::Global) g = project_global(g, *models.pca);
    return g;
}

std::vector<GlobalDescriptor> encode_images(std::span<const DescriptorSet> sets, const Models& models,
                                            std::size_t top_attentive) {
    check_models(models);
    std::vector<GlobalDescriptor> out(sets.size());
    parallel_for(sets.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = encode_image(sets[i], models, top_attentive);
    });
    return out;
}

Index build_dataset_index(std::span<const DescriptorSet> sets, const Models& models,
                          std::size_t top_attentive) {
    const auto globals = encode_images(sets, models, top_attentive);
    std::vector<std::string> labels;
    labels.reserve(sets.size());
    for (const auto& s : sets) labels.push_back(s.class_label());
    const std::size_t words = models.pca_level == PcaLevel::Global ? 1 : models.codebook.k();
    return build_index(globals, labels, words);
}

}  // namespace rsir
