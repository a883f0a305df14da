#include "rsir/vlad.hpp"

#include <cmath>

#include "rsir/error.hpp"
#include "rsir/simd/kernels.hpp"

namespace rsir {

DescriptorSet select_top_attentive(const DescriptorSet& set, std::size_t n) {
    if (set.attention_ordered()) return set.head(n);
    DescriptorSet sorted = set;
    sorted.sort_by_attention();
    return sorted.head(n);
}

std::vector<double> vlad_residuals(const FloatMatrix& features, const Codebook& codebook) {
    const std::size_t d = codebook.dim();
    if (!features.empty() && features.cols() != d) {
        fail(ErrorKind::Dimension, "VLAD: feature dimension " + std::to_string(features.cols()) +
                                       " does not match codebook dimension " + std::to_string(d));
    }
    const auto& kern = simd::active();
    std::vector<double> v(codebook.k() * d, 0.0);
    for (std::size_t j = 0; j < features.rows(); ++j) {
        const auto f = features.row(j);
        const std::size_t word = assign(f, codebook);
        kern.accumulate_residual(v.data() + word * d, f.data(), codebook.centroid(word).data(), d);
    }
    return v;
}

std::vector<double> vlad_residuals(const DescriptorSet& set, const Codebook& codebook) {
    if (!set.empty() && set.dim() != codebook.dim()) {
        fail(ErrorKind::Dimension, "VLAD: descriptor dimension " + std::to_string(set.dim()) +
                                       " does not match codebook dimension " +
                                       std::to_string(codebook.dim()));
    }
    return vlad_residuals(set.vectors(), codebook);
}

GlobalDescriptor make_global(std::string image_id, std::span<const double> values, bool normalize) {
    GlobalDescriptor g;
    g.image_id = std::move(image_id);
    g.values.resize(values.size());
    double scale = 1.0;
    if (normalize) {
        double sq = 0.0;
        for (double x : values) sq += x * x;
        if (sq > 0.0) {
            scale = 1.0 / std::sqrt(sq);
            g.normalized = true;
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) g.values[i] = static_cast<float>(values[i] * scale);
    return g;
}

GlobalDescriptor aggregate_vlad(const DescriptorSet& set, const Codebook& codebook, bool normalize) {
    return make_global(set.image_id(), vlad_residuals(set, codebook), normalize);
}

GlobalDescriptor aggregate_vlad(const FloatMatrix& features, const Codebook& codebook,
                                std::string image_id, bool normalize) {
    return make_global(std::move(image_id), vlad_residuals(features, codebook), normalize);
}

bool l2_normalize(std::span<float> values) {
    double sq = 0.0;
    for (float x : values) sq += static_cast<double>(x) * x;
    if (sq <= 0.0) return false;
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : values) x = static_cast<float>(x * inv);
    return true;
}

}  // namespace rsir
