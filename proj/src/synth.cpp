#include "rsir/synth.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "rsir/error.hpp"
#include "rsir/parallel.hpp"

namespace rsir {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream 0 draws the prototypes; stream i+1 draws image i.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::string image_id(std::size_t cls, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class%02zu_%04zu", cls, i);
    return buf;
}

std::string class_name(std::size_t cls) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "class%02zu", cls);
    return buf;
}

DoubleMatrix draw_prototypes(std::size_t count, std::size_t d, double sd, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, sd);
    DoubleMatrix p(count, d);
    for (double& x : p.values()) x = gauss(rng);
    return p;
}

}  // namespace

void check_synth_spec(const SynthSpec& spec) {
    auto need = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::Usage, std::string("synthetic spec: ") + what);
    };
    need(spec.classes >= 1, "classes must be >= 1");
    need(spec.images_per_class >= 1, "images per class must be >= 1");
    need(spec.descriptors_per_image >= 1, "descriptors per image must be >= 1");
    need(spec.d >= 1, "d must be >= 1");
    need(spec.prototypes_per_class >= 1, "prototypes per class must be >= 1");
    need(std::isfinite(spec.class_separation) && spec.class_separation > 0, "class separation must be positive");
    need(std::isfinite(spec.within_noise) && spec.within_noise > 0, "within-class noise must be positive");
    need(std::isfinite(spec.image_jitter) && spec.image_jitter >= 0, "image jitter must be >= 0");
    need(std::isfinite(spec.attention_boost) && spec.attention_boost > 0, "attention boost must be positive");
    need(std::isfinite(spec.distractor_rate) && spec.distractor_rate >= 0 && spec.distractor_rate <= 1,
         "distractor rate must lie in [0,1]");
    need(spec.distractor_rate == 0 || spec.background_prototypes >= 1,
         "distractors need at least one background prototype");
}

SyntheticDataset generate_synthetic(const SynthSpec& spec) {
    check_synth_spec(spec);
    const std::size_t d = spec.d;
    const std::size_t n_images = spec.classes * spec.images_per_class;

    std::mt19937_64 proto_rng(stream_seed(spec.seed, 0));
    std::vector<DoubleMatrix> class_protos;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        class_protos.push_back(draw_prototypes(spec.prototypes_per_class, d, spec.class_separation, proto_rng));
    }
    const DoubleMatrix background =
        draw_prototypes(spec.background_prototypes, d, spec.class_separation, proto_rng);

    SyntheticDataset out;
    out.manifest.name = spec.name;
    out.manifest.d = d;
    out.manifest.scales = standard_scales();
    for (std::size_t c = 0; c < spec.classes; ++c) out.manifest.classes.push_back(class_name(c));
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t i = 0; i < spec.images_per_class; ++i) {
            const std::string id = image_id(c, i);
            out.manifest.images.push_back({id, class_name(c), "descriptors/" + id + ".rdesc"});
        }
    }
    out.sets.resize(n_images);

    const auto scales = standard_scales();
    // Typical distance of a noisy sample from its prototype.
    const double noise_radius = spec.within_noise * std::sqrt(static_cast<double>(d));

    parallel_for(n_images, [&](std::size_t begin, std::size_t end) {
        for (std::size_t img = begin; img < end; ++img) {
            const std::size_t cls = img / spec.images_per_class;
            const auto& protos = class_protos[cls];
            std::mt19937_64 rng(stream_seed(spec.seed, img + 1));
            std::normal_distribution<double> noise(0.0, spec.within_noise);
            std::normal_distribution<double> jitter(0.0, spec.within_noise * spec.image_jitter);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::gamma_distribution<double> gamma(1.0, 1.0);
            std::uniform_int_distribution<std::size_t> pick_scale(0, scales.size() - 1);

            std::vector<double> weights(protos.rows());
            for (double& w : weights) w = gamma(rng);
            std::discrete_distribution<std::size_t> pick_proto(weights.begin(), weights.end());
            std::vector<double> offset(d);
            for (double& x : offset) x = jitter(rng);

            DescriptorSet set(d, out.manifest.images[img].id, out.manifest.images[img].class_label);
            std::vector<float> v(d);
            for (std::size_t j = 0; j < spec.descriptors_per_image; ++j) {
                const bool distractor = spec.distractor_rate > 0 && unit(rng) < spec.distractor_rate;
                std::span<const double> centre;
                if (distractor) {
                    std::uniform_int_distribution<std::size_t> pick_bg(0, background.rows() - 1);
                    centre = background.row(pick_bg(rng));
                } else {
                    centre = protos.row(pick_proto(rng));
                }
                for (std::size_t e = 0; e < d; ++e) v[e] = static_cast<float>(centre[e] + offset[e] + noise(rng));

                double attention;
                if (distractor) {
                    attention = unit(rng) * 0.5;
                } else {
                    double nearest = INFINITY;
                    for (std::size_t p = 0; p < protos.rows(); ++p) {
                        double s = 0.0;
                        const auto row = protos.row(p);
                        for (std::size_t e = 0; e < d; ++e) {
                            const double diff = v[e] - row[e];
                            s += diff * diff;
                        }
                        nearest = std::min(nearest, s);
                    }
                    attention = spec.attention_boost / (1.0 + std::sqrt(nearest) / noise_radius);
                }
                DescriptorMeta meta;
                meta.attention = static_cast<float>(attention);
                meta.scale = static_cast<float>(scales[pick_scale(rng)]);
                meta.x = static_cast<float>(unit(rng));
                meta.y = static_cast<float>(unit(rng));
                set.add(v, meta);
            }
            set.sort_by_attention();
            out.sets[img] = std::move(set);
        }
    });
    return out;
}

DatasetManifest write_synthetic_dataset(const SyntheticDataset& data, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir / "descriptors", ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + (out_dir / "descriptors").string() + ": " + ec.message());
    for (std::size_t i = 0; i < data.sets.size(); ++i) {
        save_descriptor_set(data.sets[i], out_dir / data.manifest.images[i].path);
    }
    save_manifest(data.manifest, out_dir / "manifest.json");
    return data.manifest;
}

}  // namespace rsir
