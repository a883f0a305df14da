#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "rsir/descriptor.hpp"

namespace rsir {

struct ManifestImage {
    std::string id;
    std::string class_label;
    std::filesystem::path path;  // relative to the manifest's directory

    bool operator==(const ManifestImage&) const = default;
};

/// Dataset description, stored as JSON:
///
///   {
///     "name": "ucm",
///     "d": 1024,
///     "scales": [0.25, 0.3536, 0.5, 0.7071, 1.0, 1.4142, 2.0],
///     "classes": ["agricultural", ...],
///     "images": [{"id": "agricultural00", "class": "agricultural",
///                 "path": "descriptors/agricultural00.rdesc"}, ...]
///   }
///
/// "scales" may be omitted or empty.
struct DatasetManifest {
    std::string name;
    std::size_t d = 1024;
    std::vector<double> scales;
    std::vector<std::string> classes;
    std::vector<ManifestImage> images;

    bool operator==(const DatasetManifest&) const = default;
};

/// 0.25 * sqrt(2)^i for i = 0..6.
std::vector<double> standard_scales();

DatasetManifest parse_manifest(const std::string& text, const std::string& source = "manifest");
std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

enum class IssueKind {
    MissingFile,
    DuplicateId,
    UnknownClass,
    DimensionMismatch,
    CorruptFile,
    BadScales,
    BadDimension,
};

const char* to_string(IssueKind kind) noexcept;

struct ValidationIssue {
    IssueKind kind;
    std::string image_id;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    std::size_t count(IssueKind kind) const noexcept;
};

/// Checks every image entry and descriptor file under `root`. Problems are
/// reported, never thrown.
ValidationReport validate_manifest(const DatasetManifest& manifest, const std::filesystem::path& root);

/// Manifest plus every descriptor set, in manifest order, with image ids and
/// class labels taken from the manifest.
struct Dataset {
    DatasetManifest manifest;
    std::filesystem::path root;
    std::vector<DescriptorSet> sets;
};

Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace rsir
