#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "rsir/error.hpp"
#include "rsir/evaluation.hpp"
#include "rsir/pipeline.hpp"
#include "rsir/synth.hpp"
#include "temp_dir.hpp"

using namespace rsir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

SynthSpec small_spec() {
    SynthSpec s;
    s.classes = 4;
    s.images_per_class = 12;
    s.descriptors_per_image = 80;
    s.d = 16;
    s.seed = 3;
    return s;
}

double average_precision(const SyntheticDataset& data, const PipelineConfig& pc) {
    const Models m = train_models(data.sets, pc);
    const Index index = build_dataset_index(data.sets, m, pc.top_attentive);
    EvaluationConfig cfg;
    cfg.ns = {1, 5, 10};
    return evaluate_dataset(index, data.manifest, cfg).average;
}

}  // namespace

TEST_CASE("the default synthetic dataset writes 500 valid files", "[synth]") {
    SynthSpec spec;
    REQUIRE(spec.classes == 10);
    REQUIRE(spec.images_per_class == 50);
    REQUIRE(spec.descriptors_per_image == 300);
    REQUIRE(spec.d == 64);
    test::TempDir dir;
    const auto data = generate_synthetic(spec);
    write_synthetic_dataset(data, dir.path());
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "descriptors")) files += e.is_regular_file();
    REQUIRE(files == 500);
    const auto manifest = load_manifest(dir / "manifest.json");
    REQUIRE(manifest == data.manifest);
    const auto report = validate_manifest(manifest, dir.path());
    REQUIRE(report.ok());
}

TEST_CASE("synthetic generation is deterministic", "[synth]") {
    const auto spec = small_spec();
    test::TempDir a, b;
    write_synthetic_dataset(generate_synthetic(spec), a.path());
    write_synthetic_dataset(generate_synthetic(spec), b.path());
    REQUIRE(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    for (const auto& e : std::filesystem::directory_iterator(a / "descriptors")) {
        REQUIRE(slurp(e.path()) == slurp(b / "descriptors" / e.path().filename()));
    }
    auto other = spec;
    other.seed = 4;
    REQUIRE_FALSE(generate_synthetic(other).sets[0] == generate_synthetic(spec).sets[0]);
}

TEST_CASE("synthetic sets are attention-ordered with distractors at the bottom", "[synth]") {
    auto spec = small_spec();
    spec.distractor_rate = 0.3;
    const auto data = generate_synthetic(spec);
    for (const auto& s : data.sets) {
        REQUIRE(s.size() == 80);
        REQUIRE(s.attention_ordered());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto& m = s.meta(i);
            REQUIRE(m.attention >= 0.0f);
            REQUIRE(m.x >= 0.0f);
            REQUIRE(m.x <= 1.0f);
        }
        // distractors score below 0.5, class features above boost / (1 + a few)
        REQUIRE(s.meta(s.size() - 1).attention < 0.5f);
        REQUIRE(s.meta(0).attention > 1.0f);
    }
}

TEST_CASE("near-zero noise gives perfect retrieval", "[synth]") {
    SynthSpec spec;
    spec.within_noise = 1e-4;
    PipelineConfig pc;
    pc.k = 16;
    REQUIRE(average_precision(generate_synthetic(spec), pc) == 1.0);
}

TEST_CASE("more noise never helps", "[synth]") {
    // 3-point ladder; slack covers sampling jitter between noise levels
    double previous = 2.0;
    for (double noise : {1.0, 2.0, 3.0}) {
        auto spec = small_spec();
        spec.within_noise = noise;
        PipelineConfig pc;
        pc.k = 8;
        const double p = average_precision(generate_synthetic(spec), pc);
        CAPTURE(noise, p);
        REQUIRE(p <= previous + 0.02);
        previous = p;
    }
}

TEST_CASE("synth spec validation", "[synth]") {
    auto bad = small_spec();
    bad.classes = 0;
    REQUIRE_THROWS_AS(check_synth_spec(bad), Error);
    bad = small_spec();
    bad.within_noise = 0.0;
    REQUIRE_THROWS_AS(check_synth_spec(bad), Error);
    bad = small_spec();
    bad.distractor_rate = 1.5;
    REQUIRE_THROWS_AS(check_synth_spec(bad), Error);
}

TEST_CASE("pipeline shapes per PCA level", "[pipeline]") {
    const auto data = generate_synthetic(small_spec());
    PipelineConfig pc;
    pc.k = 4;

    const Models plain = train_models(data.sets, pc);
    const Index a = build_dataset_index(data.sets, plain);
    REQUIRE(a.dim() == 4 * 16);
    REQUIRE(a.words() == 4);

    pc.pca_level = PcaLevel::Feature;
    pc.pca_dim = 8;
    const Models feat = train_models(data.sets, pc);
    REQUIRE(feat.codebook.dim() == 8);
    const Index b = build_dataset_index(data.sets, feat);
    REQUIRE(b.dim() == 32);
    REQUIRE(b.word_dim() == 8);

    pc.pca_level = PcaLevel::Global;
    pc.pca_dim = 20;
    const Models glob = train_models(data.sets, pc);
    const Index c = build_dataset_index(data.sets, glob);
    REQUIRE(c.dim() == 20);
    REQUIRE(c.words() == 1);

    // mismatched spaces are refused
    Models wrong = feat;
    wrong.codebook = plain.codebook;
    REQUIRE_THROWS_AS(encode_images(data.sets, wrong), Error);
}
