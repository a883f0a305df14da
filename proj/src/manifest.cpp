#include "rsir/manifest.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "binary_io.hpp"
#include "rsir/error.hpp"

namespace rsir {
namespace {

using nlohmann::json;

// Scales are often written with three or four decimals (0.354, 1.4142).
constexpr double kScaleRelTolerance = 5e-3;

template <typename T>
T field(const json& j, const char* key, const std::string& source) {
    if (!j.contains(key)) fail(ErrorKind::Format, source + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, source + ": field \"" + key + "\": " + e.what());
    }
}

}  // namespace

std::vector<double> standard_scales() {
    std::vector<double> s(7);
    for (int i = 0; i < 7; ++i) s[static_cast<std::size_t>(i)] = 0.25 * std::pow(std::sqrt(2.0), i);
    return s;
}

const char* to_string(IssueKind kind) noexcept {
    switch (kind) {
        case IssueKind::MissingFile: return "missing-file";
        case IssueKind::DuplicateId: return "duplicate-id";
        case IssueKind::UnknownClass: return "unknown-class";
        case IssueKind::DimensionMismatch: return "dimension-mismatch";
        case IssueKind::CorruptFile: return "corrupt-file";
        case IssueKind::BadScales: return "bad-scales";
        case IssueKind::BadDimension: return "bad-dimension";
    }
    return "unknown";
}

std::size_t ValidationReport::count(IssueKind kind) const noexcept {
    std::size_t n = 0;
    for (const auto& issue : issues) n += issue.kind == kind ? 1 : 0;
    return n;
}

DatasetManifest parse_manifest(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Format, source + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Format, source + ": top level must be an object");

    DatasetManifest m;
    m.name = field<std::string>(j, "name", source);
    const auto d = field<long long>(j, "d", source);
    if (d <= 0) fail(ErrorKind::Format, source + ": \"d\" must be positive");
    m.d = static_cast<std::size_t>(d);
    if (j.contains("scales") && !j.at("scales").is_null()) m.scales = field<std::vector<double>>(j, "scales", source);
    m.classes = field<std::vector<std::string>>(j, "classes", source);
    const auto images = field<json>(j, "images", source);
    if (!images.is_array()) fail(ErrorKind::Format, source + ": \"images\" must be an array");
    m.images.reserve(images.size());
    for (const auto& entry : images) {
        ManifestImage img;
        img.id = field<std::string>(entry, "id", source);
        img.class_label = field<std::string>(entry, "class", source);
        img.path = field<std::string>(entry, "path", source);
        m.images.push_back(std::move(img));
    }
    return m;
}

std::string format_manifest(const DatasetManifest& m) {
    json j;
    j["name"] = m.name;
    j["d"] = m.d;
    j["scales"] = m.scales;
    j["classes"] = m.classes;
    json images = json::array();
    for (const auto& img : m.images) {
        images.push_back({{"id", img.id}, {"class", img.class_label}, {"path", img.path.generic_string()}});
    }
    j["images"] = std::move(images);
    return j.dump(2) + "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    return parse_manifest(io::read_file(path), path.string());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    io::write_file(path, format_manifest(manifest));
}

ValidationReport validate_manifest(const DatasetManifest& manifest, const std::filesystem::path& root) {
    ValidationReport report;
    auto add = [&report](IssueKind kind, std::string id, std::string message) {
        report.issues.push_back({kind, std::move(id), std::move(message)});
    };

    if (manifest.d == 0) add(IssueKind::BadDimension, {}, "manifest dimension d must be positive");

    if (!manifest.scales.empty()) {
        const auto expected = standard_scales();
        bool good = manifest.scales.size() == expected.size();
        for (std::size_t i = 0; good && i < expected.size(); ++i) {
            good = std::abs(manifest.scales[i] - expected[i]) <= kScaleRelTolerance * expected[i];
        }
        if (!good) add(IssueKind::BadScales, {}, "scales must be 0.25*sqrt(2)^i for i=0..6");
    }

    const std::set<std::string> classes(manifest.classes.begin(), manifest.classes.end());
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& img : manifest.images) {
        if (++seen[img.id] > 1) {
            add(IssueKind::DuplicateId, img.id, "duplicate image id \"" + img.id + "\"");
        }
        if (!classes.contains(img.class_label)) {
            add(IssueKind::UnknownClass, img.id, "class \"" + img.class_label + "\" not declared");
        }
        const auto path = root / img.path;
        std::error_code ec;
        if (!std::filesystem::is_regular_file(path, ec)) {
            add(IssueKind::MissingFile, img.id, "missing descriptor file " + path.string());
            continue;
        }
        if (manifest.d == 0) continue;
        try {
            (void)load_descriptor_set(path, manifest.d);
        } catch (const Error& e) {
            add(e.kind() == ErrorKind::Dimension ? IssueKind::DimensionMismatch : IssueKind::CorruptFile,
                img.id, e.what());
        }
    }
    return report;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    Dataset ds;
    ds.manifest = load_manifest(manifest_path);
    ds.root = manifest_path.parent_path();
    ds.sets.reserve(ds.manifest.images.size());
    for (const auto& img : ds.manifest.images) {
        auto set = load_descriptor_set(ds.root / img.path, ds.manifest.d);
        set.set_image_id(img.id);
        set.set_class_label(img.class_label);
        ds.sets.push_back(std::move(set));
    }
    return ds;
}

}  // namespace rsir
