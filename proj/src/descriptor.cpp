#include "rsir/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "rsir/error.hpp"

namespace rsir {
namespace {

constexpr std::size_t kRecordHeaderFloats = 4;

// Empty string when the metadata is valid.
std::string meta_problem(const DescriptorMeta& m) {
    if (!std::isfinite(m.x) || m.x < 0.0f || m.x > 1.0f) return "x outside [0,1]";
    if (!std::isfinite(m.y) || m.y < 0.0f || m.y > 1.0f) return "y outside [0,1]";
    if (!std::isfinite(m.scale) || m.scale <= 0.0f) return "scale not positive";
    if (!std::isfinite(m.attention) || m.attention < 0.0f) return "attention negative or non-finite";
    return {};
}

bool all_finite(std::span<const float> v) {
    return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

}  // namespace

DescriptorSet::DescriptorSet(std::size_t d, std::string image_id, std::string class_label)
    : image_id_(std::move(image_id)), class_label_(std::move(class_label)), vectors_(0, d) {}

void DescriptorSet::add(std::span<const float> vector, const DescriptorMeta& meta) {
    if (vector.size() != dim()) {
        fail(ErrorKind::Dimension, "descriptor dimension mismatch: expected " +
                                       std::to_string(dim()) + ", found " +
                                       std::to_string(vector.size()));
    }
    if (!all_finite(vector)) fail(ErrorKind::Data, "descriptor vector has non-finite entries");
    if (auto problem = meta_problem(meta); !problem.empty()) fail(ErrorKind::Data, "descriptor " + problem);
    vectors_.append_row(vector);
    meta_.push_back(meta);
}

void DescriptorSet::add(const LocalDescriptor& descriptor) {
    add(descriptor.vector,
        DescriptorMeta{descriptor.attention, descriptor.scale, descriptor.x, descriptor.y});
}

void DescriptorSet::sort_by_attention() {
    if (attention_ordered()) return;
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
        return meta_[a].attention > meta_[b].attention;
    });
    FloatMatrix sorted(0, dim());
    sorted.reserve_rows(size());
    std::vector<DescriptorMeta> sorted_meta;
    sorted_meta.reserve(size());
    for (std::size_t i : order) {
        sorted.append_row(vectors_.row(i));
        sorted_meta.push_back(meta_[i]);
    }
    vectors_ = std::move(sorted);
    meta_ = std::move(sorted_meta);
}

bool DescriptorSet::attention_ordered() const noexcept {
    return std::is_sorted(meta_.begin(), meta_.end(),
                          [](const auto& a, const auto& b) { return a.attention > b.attention; });
}

DescriptorSet DescriptorSet::head(std::size_t n) const {
    DescriptorSet out(dim(), image_id_, class_label_);
    const std::size_t keep = std::min(n, size());
    out.vectors_ = FloatMatrix(keep, dim(),
                               std::vector<float>(vectors_.data(), vectors_.data() + keep * dim()));
    out.meta_.assign(meta_.begin(), meta_.begin() + static_cast<std::ptrdiff_t>(keep));
    return out;
}

void check_descriptor_set(const DescriptorSet& set) {
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (auto problem = meta_problem(set.meta(i)); !problem.empty()) {
            fail(ErrorKind::Data, "descriptor " + std::to_string(i) + ": " + problem);
        }
        if (!all_finite(set.vector(i))) {
            fail(ErrorKind::Data, "descriptor " + std::to_string(i) + ": non-finite vector entry");
        }
    }
    if (!set.attention_ordered()) fail(ErrorKind::Data, "descriptors not ordered by attention");
}

std::string encode_descriptor_set(const DescriptorSet& set) {
    io::ByteWriter w;
    w.bytes({kDescriptorMagic, 8});
    w.put<std::uint16_t>(kDescriptorVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& m = set.meta(i);
        w.put(m.attention);
        w.put(m.scale);
        w.put(m.x);
        w.put(m.y);
        w.put_all(set.vector(i));
    }
    return w.buffer();
}

DescriptorSet decode_descriptor_set(std::string bytes, const std::string& source,
                                    std::size_t expected_d) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic({kDescriptorMagic, 8});
    const auto version_offset = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kDescriptorVersion) {
        fail(ErrorKind::Format, source + ": unsupported version " + std::to_string(version) +
                                    " at byte offset " + std::to_string(version_offset));
    }
    const auto d = r.get<std::uint32_t>("dimension");
    const auto count = r.get<std::uint32_t>("count");
    if (d != expected_d) {
        fail(ErrorKind::Dimension, source + ": dimension mismatch: expected " +
                                       std::to_string(expected_d) + ", found " + std::to_string(d));
    }
    const std::size_t record_bytes = (kRecordHeaderFloats + d) * sizeof(float);
    r.require(record_bytes * count, "descriptor payload");

    DescriptorSet set(d, std::filesystem::path(source).stem().string());
    std::vector<float> vec(d);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto record_offset = r.offset();
        DescriptorMeta m;
        m.attention = r.get<float>("attention");
        m.scale = r.get<float>("scale");
        m.x = r.get<float>("x");
        m.y = r.get<float>("y");
        r.get_all(std::span<float>(vec), "vector");
        try {
            set.add(vec, m);
        } catch (const Error& e) {
            fail(ErrorKind::Format, source + ": invalid record " + std::to_string(i) +
                                        " at byte offset " + std::to_string(record_offset) + ": " +
                                        e.what());
        }
    }
    r.expect_end();
    set.sort_by_attention();
    return set;
}

DescriptorSet load_descriptor_set(const std::filesystem::path& path, std::size_t expected_d) {
    return decode_descriptor_set(io::read_file(path), path.string(), expected_d);
}

void save_descriptor_set(const DescriptorSet& set, const std::filesystem::path& path) {
    check_descriptor_set(set);
    io::write_file(path, encode_descriptor_set(set));
}

}  // namespace rsir
