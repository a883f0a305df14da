#include "rsir/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rsir/codebook.hpp"
#include "rsir/engine.hpp"
#include "rsir/error.hpp"
#include "rsir/evaluation.hpp"
#include "rsir/expansion.hpp"
#include "rsir/manifest.hpp"
#include "rsir/parallel.hpp"
#include "rsir/pca.hpp"
#include "rsir/pipeline.hpp"
#include "rsir/simd/kernels.hpp"
#include "rsir/synth.hpp"

namespace fs = std::filesystem;

namespace rsir::cli {
namespace {

constexpr const char* kCodebookFile = "codebook.rcbk";
constexpr const char* kPcaFile = "pca.rpca";
constexpr const char* kIndexFile = "index.rvlad";

struct IndexMissing : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Usage: return kUsage;
        case ErrorKind::Io: return kIo;
        case ErrorKind::Format: return kFormat;
        case ErrorKind::Dimension: return kDimension;
        case ErrorKind::InsufficientData: return kInsufficientData;
        case ErrorKind::Data: return kData;
        case ErrorKind::EmptyIndex: return kEmptyIndex;
        case ErrorKind::Evaluation: return kEvaluation;
        case ErrorKind::Construction: return kConstruction;
    }
    return kInternal;
}

// A dataset may be named by its manifest or by the directory holding manifest.json.
fs::path manifest_path(const fs::path& dataset) {
    return fs::is_directory(dataset) ? dataset / "manifest.json" : dataset;
}

fs::path prepare_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

Index open_index(const fs::path& path) {
    if (!fs::exists(path)) throw IndexMissing("index file " + path.string() + " does not exist");
    return load_index(path);
}

void note_k(std::size_t k, std::ostream& err) {
    if (k != 2 && k != 4 && k != 8 && k != 16) {
        err << "note: k=" << k << " is outside the usual grid {2,4,8,16}\n";
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) prepare_out_dir(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    f << text;
    if (!f) fail(ErrorKind::Io, "write error on " + path.string());
}

// Infers the level of a PCA model from how it fits the codebook.
PcaLevel infer_level(const PcaModel& pca, const Codebook& codebook) {
    if (pca.d_in() == codebook.k() * codebook.dim() && pca.d_out() != codebook.dim()) return PcaLevel::Global;
    return PcaLevel::Feature;
}

Models load_models(const fs::path& codebook_path, const std::string& pca_path, const std::string& level) {
    Models m;
    m.codebook = load_codebook(codebook_path);
    if (!pca_path.empty()) {
        m.pca = load_pca(pca_path);
        m.pca_level = level.empty() ? infer_level(*m.pca, m.codebook) : parse_pca_level(level);
        if (m.pca_level == PcaLevel::None) m.pca.reset();
    }
    check_models(m);
    return m;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v <= 0) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            fail(ErrorKind::Usage, std::string(what) + ": \"" + item + "\" is not a positive integer");
        }
    }
    if (out.empty()) fail(ErrorKind::Usage, std::string(what) + " is empty");
    return out;
}

void log_config(const CLI::App& app, const CLI::App& sub, std::ostream& err) {
    err << "# rsir " << sub.get_name() << "\n"
        << "# simd=" << simd::to_string(simd::active().isa) << " workers=" << worker_count() << "\n";
    // the app-wide dump covers every subcommand; keep only the one that ran
    const std::string prefix = sub.get_name() + ".";
    std::istringstream cfg(app.config_to_str(true, false));
    for (std::string line; std::getline(cfg, line);) {
        if (line.rfind(prefix, 0) == 0) err << "# " << line.substr(prefix.size()) << "\n";
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Remote-sensing image retrieval over aggregated local descriptors", "rsir"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "rsir 1.0");

    // synth
    SynthSpec synth;
    std::string synth_out;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic descriptor dataset");
    cmd_synth->add_option("--classes", synth.classes)->capture_default_str();
    cmd_synth->add_option("--images", synth.images_per_class, "Images per class")->capture_default_str();
    cmd_synth->add_option("--per-image", synth.descriptors_per_image, "Descriptors per image")->capture_default_str();
    cmd_synth->add_option("--dim", synth.d)->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed)->capture_default_str();
    cmd_synth->add_option("--separation", synth.class_separation)->capture_default_str();
    cmd_synth->add_option("--noise", synth.within_noise)->capture_default_str();
    cmd_synth->add_option("--jitter", synth.image_jitter)->capture_default_str();
    cmd_synth->add_option("--boost", synth.attention_boost, "Attention boost of class features")->capture_default_str();
    cmd_synth->add_option("--distractors", synth.distractor_rate, "Distractor rate")->capture_default_str();
    cmd_synth->add_option("--prototypes", synth.prototypes_per_class)->capture_default_str();
    cmd_synth->add_option("--background", synth.background_prototypes)->capture_default_str();
    cmd_synth->add_option("--name", synth.name)->capture_default_str();
    cmd_synth->add_option("--out", synth_out, "Output directory")->required();

    // validate
    std::string dataset;
    auto* cmd_validate = app.add_subcommand("validate", "Check a manifest and its descriptor files");
    cmd_validate->add_option("--dataset", dataset, "Manifest file or its directory")->required();

    // train-codebook
    PipelineConfig pc;
    std::string out_dir;
    std::string pca_path;
    std::string codebook_path;
    auto* cmd_codebook = app.add_subcommand("train-codebook", "Train a k-means codebook");
    cmd_codebook->add_option("--dataset", dataset)->required();
    cmd_codebook->add_option("--k", pc.k)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_codebook->add_option("--per-image", pc.codebook_per_image, "Most attentive features per image")
        ->capture_default_str()->check(CLI::PositiveNumber);
    cmd_codebook->add_option("--seed", pc.seed)->capture_default_str();
    cmd_codebook->add_option("--max-iters", pc.max_iters)->capture_default_str();
    cmd_codebook->add_option("--tol", pc.tol)->capture_default_str();
    cmd_codebook->add_option("--pca", pca_path, "Feature-level PCA applied before clustering");
    cmd_codebook->add_option("--out", out_dir)->required();

    // train-pca
    std::string level_text = "feature";
    std::size_t pca_dim = 0;
    auto* cmd_pca = app.add_subcommand("train-pca", "Fit a PCA model at feature or global level");
    cmd_pca->add_option("--dataset", dataset)->required();
    cmd_pca->add_option("--level", level_text)->capture_default_str()->check(CLI::IsMember({"feature", "global"}));
    cmd_pca->add_option("--dim", pca_dim, "Output dimension")->required()->check(CLI::PositiveNumber);
    cmd_pca->add_option("--per-image", pc.codebook_per_image)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_pca->add_option("--codebook", codebook_path, "Required for global level");
    cmd_pca->add_option("--top", pc.top_attentive)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_pca->add_option("--out", out_dir)->required();

    // build-index
    std::string pca_level_text;
    auto* cmd_index = app.add_subcommand("build-index", "Encode every image and write the index");
    cmd_index->add_option("--dataset", dataset)->required();
    cmd_index->add_option("--codebook", codebook_path)->required();
    cmd_index->add_option("--top", pc.top_attentive)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_index->add_option("--pca", pca_path);
    cmd_index->add_option("--pca-level", pca_level_text, "Inferred from the model when omitted")
        ->check(CLI::IsMember({"none", "feature", "global"}));
    cmd_index->add_option("--out", out_dir)->required();

    // query
    std::string index_path;
    std::string query_id;
    std::string descriptors_path;
    std::string expansion_text = "none";
    std::size_t top_k = 20;
    std::size_t depth = kExpansionDepth;
    bool include_self = false;
    auto* cmd_query = app.add_subcommand("query", "Rank the index against one image");
    cmd_query->add_option("--index", index_path)->required();
    cmd_query->add_option("--dataset", dataset, "Supplies class labels");
    auto* opt_id = cmd_query->add_option("--id", query_id, "Query by an indexed image id");
    auto* opt_desc = cmd_query->add_option("--descriptors", descriptors_path, "Query by a descriptor file");
    opt_id->excludes(opt_desc);
    cmd_query->add_option("--codebook", codebook_path, "Required with --descriptors");
    cmd_query->add_option("--pca", pca_path);
    cmd_query->add_option("--pca-level", pca_level_text)->check(CLI::IsMember({"none", "feature", "global"}));
    cmd_query->add_option("--top", pc.top_attentive)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_query->add_option("--expansion", expansion_text)->capture_default_str()
        ->check(CLI::IsMember({"none", "psum", "pinv"}));
    cmd_query->add_option("--depth", depth, "Candidates fused by query expansion")->capture_default_str();
    cmd_query->add_option("--top-k", top_k)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_query->add_flag("--include-self", include_self, "Let an indexed query match itself");

    // evaluate
    std::string ns_text = "1,3,5,10,15,20";
    std::string report_path;
    std::string json_path;
    std::uint64_t meta_seed = 0;
    std::size_t meta_pca_dim = 0;
    auto* cmd_eval = app.add_subcommand("evaluate", "Precision@N with every image as a query");
    cmd_eval->add_option("--dataset", dataset)->required();
    cmd_eval->add_option("--index", index_path)->required();
    cmd_eval->add_option("--n", ns_text, "Comma-separated cut-offs")->capture_default_str();
    cmd_eval->add_option("--expansion", expansion_text)->capture_default_str()
        ->check(CLI::IsMember({"none", "psum", "pinv"}));
    cmd_eval->add_option("--depth", depth)->capture_default_str();
    cmd_eval->add_flag("--include-self", include_self);
    cmd_eval->add_option("--report", report_path, "Text report file");
    cmd_eval->add_option("--json", json_path, "Machine-readable report file");
    cmd_eval->add_option("--pca-level", pca_level_text, "Recorded in the report")
        ->check(CLI::IsMember({"none", "feature", "global"}));
    cmd_eval->add_option("--pca-dim", meta_pca_dim, "Recorded in the report");
    cmd_eval->add_option("--seed", meta_seed, "Recorded in the report");

    // benchmark
    std::string sizes_text = "50,100,150,200,250,300,350,400,450,500";
    std::string dims_text = "16384,1024,512,256";
    std::size_t repetitions = 5;
    std::uint64_t bench_seed = 0;
    auto* cmd_bench = app.add_subcommand("benchmark", "Time exhaustive search by index size and dimension");
    cmd_bench->add_option("--sizes", sizes_text)->capture_default_str();
    cmd_bench->add_option("--dims", dims_text)->capture_default_str();
    cmd_bench->add_option("--repetitions", repetitions)->capture_default_str()->check(CLI::PositiveNumber);
    cmd_bench->add_option("--seed", bench_seed)->capture_default_str();
    cmd_bench->add_option("--out", out_dir, "Directory for timing.txt and timing.json");

    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("rsir");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        log_config(app, *sub, err);

        if (sub == cmd_synth) {
            const auto data = generate_synthetic(synth);
            write_synthetic_dataset(data, prepare_out_dir(synth_out));
            out << "wrote " << data.sets.size() << " descriptor files and "
                << (fs::path(synth_out) / "manifest.json").string() << "\n";
        } else if (sub == cmd_validate) {
            const fs::path mpath = manifest_path(dataset);
            const auto manifest = load_manifest(mpath);
            const auto report = validate_manifest(manifest, mpath.parent_path());
            for (const auto& issue : report.issues) {
                out << to_string(issue.kind) << "\t" << issue.image_id << "\t" << issue.message << "\n";
            }
            out << manifest.images.size() << " images, " << report.issues.size() << " issues\n";
            if (!report.ok()) throw ValidationFailed("manifest has " + std::to_string(report.issues.size()) + " issues");
        } else if (sub == cmd_codebook) {
            note_k(pc.k, err);
            const auto data = load_dataset(manifest_path(dataset));
            FloatMatrix training = select_codebook_training_features(data.sets, pc.codebook_per_image);
            if (!pca_path.empty()) {
                const PcaModel pca = load_pca(pca_path);
                training = project_rows(training, pca);
            }
            KMeansOptions opts{pc.k, pc.seed, pc.max_iters, pc.tol};
            const auto result = run_kmeans(training, opts);
            const fs::path path = prepare_out_dir(out_dir) / kCodebookFile;
            save_codebook(result.codebook, path);
            const auto& meta = result.codebook.meta();
            out << "codebook k=" << result.codebook.k() << " d=" << result.codebook.dim() << " features="
                << training.rows() << " iterations=" << meta.iterations
                << " converged=" << (meta.converged ? "yes" : "no") << " inertia=" << meta.inertia << "\n"
                << "wrote " << path.string() << "\n";
        } else if (sub == cmd_pca) {
            const auto data = load_dataset(manifest_path(dataset));
            const PcaLevel level = parse_pca_level(level_text);
            FloatMatrix rows;
            if (level == PcaLevel::Feature) {
                rows = select_codebook_training_features(data.sets, pc.codebook_per_image);
            } else {
                if (codebook_path.empty()) fail(ErrorKind::Usage, "global-level PCA needs --codebook");
                Models plain;
                plain.codebook = load_codebook(codebook_path);
                const auto globals = encode_images(data.sets, plain, pc.top_attentive);
                rows = FloatMatrix(0, plain.codebook.k() * plain.codebook.dim());
                for (const auto& g : globals) rows.append_row(g.values);
            }
            const PcaModel model = fit_pca(rows, pca_dim);
            const fs::path path = prepare_out_dir(out_dir) / kPcaFile;
            save_pca(model, path);
            double kept = 0.0;
            for (double v : model.explained_variance) kept += v;
            out << "pca level=" << to_string(level) << " d_in=" << model.d_in() << " d_out=" << model.d_out()
                << " samples=" << rows.rows() << " retained_variance=" << kept << "\n"
                << "wrote " << path.string() << "\n";
        } else if (sub == cmd_index) {
            const auto data = load_dataset(manifest_path(dataset));
            const Models models = load_models(codebook_path, pca_path, pca_level_text);
            note_k(models.codebook.k(), err);
            const Index index = build_dataset_index(data.sets, models, pc.top_attentive);
            const fs::path path = prepare_out_dir(out_dir) / kIndexFile;
            save_index(index, path);
            out << "index rows=" << index.size() << " dim=" << index.dim() << " k=" << index.words()
                << " pca=" << to_string(models.pca_level) << "\n"
                << "wrote " << path.string() << "\n";
        } else if (sub == cmd_query) {
            Index index = open_index(index_path);
            if (!dataset.empty()) index.attach_labels(load_manifest(manifest_path(dataset)));
            GlobalDescriptor query;
            if (!query_id.empty()) {
                const auto row = index.find(query_id);
                if (!row) fail(ErrorKind::Data, "image \"" + query_id + "\" is not in the index");
                const auto values = index.row(*row);
                query = {query_id, std::vector<float>(values.begin(), values.end()), true};
            } else if (!descriptors_path.empty()) {
                if (codebook_path.empty()) fail(ErrorKind::Usage, "--descriptors needs --codebook");
                const Models models = load_models(codebook_path, pca_path, pca_level_text);
                const std::size_t d = models.pca_level == PcaLevel::Feature ? models.pca->d_in()
                                                                            : models.codebook.dim();
                query = encode_image(load_descriptor_set(descriptors_path, d), models, pc.top_attentive);
            } else {
                fail(ErrorKind::Usage, "query needs --id or --descriptors");
            }
            ExpansionOptions opts;
            opts.method = parse_expansion(expansion_text);
            opts.top_k = top_k;
            opts.depth = depth;
            opts.leave_one_out = !include_self;
            const RankedList ranked = query_with_expansion(index, query, opts);
            out << std::fixed << std::setprecision(6);
            for (std::size_t i = 0; i < ranked.size(); ++i) {
                out << i + 1 << "\t" << ranked[i].image_id << "\t"
                    << (ranked[i].class_label.empty() ? "-" : ranked[i].class_label) << "\t"
                    << ranked[i].distance << "\n";
            }
        } else if (sub == cmd_eval) {
            const auto manifest = load_manifest(manifest_path(dataset));
            Index index = open_index(index_path);
            index.attach_labels(manifest);
            EvaluationConfig cfg;
            cfg.expansion = parse_expansion(expansion_text);
            cfg.ns = parse_sizes(ns_text, "--n");
            cfg.expansion_depth = depth;
            cfg.leave_one_out = !include_self;
            cfg.k = index.words();
            cfg.d = index.word_dim();
            cfg.pca_level = pca_level_text.empty() ? PcaLevel::None : parse_pca_level(pca_level_text);
            cfg.pca_dim = meta_pca_dim;
            cfg.seed = meta_seed;
            const auto report = evaluate_dataset(index, manifest, cfg);
            const std::string table = report.to_table();
            out << table;
            if (!report_path.empty()) write_text(report_path, table);
            if (!json_path.empty()) write_text(json_path, report.to_json());
            for (const auto& w : report.warnings) err << "warning: " << w << "\n";
        } else if (sub == cmd_bench) {
            const auto sizes = parse_sizes(sizes_text, "--sizes");
            const auto dims = parse_sizes(dims_text, "--dims");
            const auto report = benchmark_search(sizes, dims, repetitions, bench_seed);
            out << report.to_table();
            if (!out_dir.empty()) {
                const fs::path dir = prepare_out_dir(out_dir);
                write_text(dir / "timing.txt", report.to_table());
                write_text(dir / "timing.json", report.to_json());
            }
        }
        return kOk;
    } catch (const IndexMissing& e) {
        err << "error: " << e.what() << "\n";
        return kIndexMissing;
    } catch (const ValidationFailed& e) {
        err << "error: " << e.what() << "\n";
        return kValidationFailed;
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return code_for(e.kind());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace rsir::cli
