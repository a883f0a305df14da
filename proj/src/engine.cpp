#include "rsir/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "rsir/error.hpp"
#include "rsir/parallel.hpp"
#include "rsir/simd/kernels.hpp"

namespace rsir {
namespace {

// Below this many floats per query the scan stays on the calling thread.
constexpr std::size_t kParallelScanFloats = std::size_t{1} << 20;

// Minimum duration of one timed batch in benchmark_search.
constexpr double kMinBatchSeconds = 2e-3;

}  // namespace

std::optional<std::size_t> Index::find(const std::string& image_id) const {
    const auto it = lookup_.find(image_id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

void Index::attach_labels(const DatasetManifest& manifest) {
    for (const auto& img : manifest.images) {
        if (auto row = find(img.id)) labels_[*row] = img.class_label;
    }
}

Index build_index(std::span<const GlobalDescriptor> globals, std::span<const std::string> labels,
                  std::size_t words) {
    if (!labels.empty() && labels.size() != globals.size()) {
        fail(ErrorKind::Construction, "label count " + std::to_string(labels.size()) +
                                          " does not match descriptor count " +
                                          std::to_string(globals.size()));
    }
    Index index;
    if (globals.empty()) return index;
    const std::size_t dim = globals.front().size();
    if (dim == 0) fail(ErrorKind::Dimension, "global descriptors have zero length");
    if (words == 0) words = 1;
    if (dim % words != 0) {
        fail(ErrorKind::Construction, "descriptor length " + std::to_string(dim) +
                                          " is not a multiple of k=" + std::to_string(words));
    }
    index.words_ = words;
    index.matrix_ = FloatMatrix(0, dim);
    index.matrix_.reserve_rows(globals.size());
    for (std::size_t i = 0; i < globals.size(); ++i) {
        const auto& g = globals[i];
        if (g.size() != dim) {
            fail(ErrorKind::Dimension, "global descriptor " + g.image_id + " has length " +
                                           std::to_string(g.size()) + ", expected " +
                                           std::to_string(dim));
        }
        if (!index.lookup_.emplace(g.image_id, i).second) {
            fail(ErrorKind::Construction, "duplicate image id \"" + g.image_id + "\" in index");
        }
        index.ids_.push_back(g.image_id);
        index.labels_.push_back(labels.empty() ? std::string{} : labels[i]);
        index.matrix_.append_row(g.values);
    }
    return index;
}

RankedList search(const Index& index, std::span<const float> query, std::size_t top_k,
                  std::optional<std::size_t> exclude_row) {
    if (index.empty()) fail(ErrorKind::EmptyIndex, "search on an empty index");
    if (top_k == 0) fail(ErrorKind::Usage, "top_k must be at least 1");
    if (query.size() != index.dim()) {
        fail(ErrorKind::Dimension, "query length " + std::to_string(query.size()) +
                                       " does not match index dimension " +
                                       std::to_string(index.dim()));
    }
    const std::size_t n = index.size();
    const std::size_t dim = index.dim();
    const auto& kern = simd::active();
    std::vector<double> d2(n);
    auto scan = [&](std::size_t begin, std::size_t end) {
        kern.squared_l2_rows(query.data(), index.matrix().data() + begin * dim, end - begin, dim,
                             d2.data() + begin);
    };
    if (n * dim >= kParallelScanFloats) {
        parallel_for(n, scan);
    } else {
        scan(0, n);
    }

    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!exclude_row || *exclude_row != r) order.push_back(r);
    }
    const std::size_t keep = std::min(top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&d2](std::size_t a, std::size_t b) {
                          return d2[a] < d2[b] || (d2[a] == d2[b] && a < b);
                      });

    RankedList out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t r = order[i];
        out.push_back({index.id(r), index.label(r), std::sqrt(d2[r]), r});
    }
    return out;
}

std::string encode_index(const Index& index) {
    io::ByteWriter w;
    w.bytes({kIndexMagic, 8});
    w.put<std::uint16_t>(kIndexVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(index.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(index.words()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(index.word_dim()));
    for (std::size_t r = 0; r < index.size(); ++r) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(index.id(r).size()));
        w.bytes(index.id(r));
        w.put_all(index.row(r));
    }
    return w.buffer();
}

Index decode_index(std::string bytes, const std::string& source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic({kIndexMagic, 8});
    const auto version = r.get<std::uint16_t>("version");
    if (version != kIndexVersion) {
        fail(ErrorKind::Format, source + ": unsupported index version " + std::to_string(version));
    }
    const auto count = r.get<std::uint32_t>("count");
    const auto k = r.get<std::uint32_t>("k");
    const auto d = r.get<std::uint32_t>("d");
    const std::size_t dim = static_cast<std::size_t>(k) * d;
    if (count > 0 && dim == 0) fail(ErrorKind::Format, source + ": index with zero-length rows");

    Index index;
    index.words_ = k == 0 ? 1 : k;
    index.matrix_ = FloatMatrix(0, dim);
    index.matrix_.reserve_rows(count);
    std::vector<float> row(dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto id_offset = r.offset();
        const auto len = r.get<std::uint32_t>("id length");
        std::string id = r.get_string(len, "image id");
        r.get_all(std::span<float>(row), "descriptor");
        if (!index.lookup_.emplace(id, i).second) {
            fail(ErrorKind::Format, source + ": duplicate image id \"" + id + "\" at byte offset " +
                                        std::to_string(id_offset));
        }
        index.ids_.push_back(std::move(id));
        index.labels_.emplace_back();
        index.matrix_.append_row(std::span<const float>(row));
    }
    r.expect_end();
    return index;
}

void save_index(const Index& index, const std::filesystem::path& path) {
    io::write_file(path, encode_index(index));
}

Index load_index(const std::filesystem::path& path) {
    return decode_index(io::read_file(path), path.string());
}

const TimingCell& TimingReport::cell(std::size_t size, std::size_t dim) const {
    for (const auto& c : cells) {
        if (c.size == size && c.dim == dim) return c;
    }
    fail(ErrorKind::Usage, "no timing cell for size " + std::to_string(size) + ", dim " +
                               std::to_string(dim));
}

std::string TimingReport::to_table() const {
    std::ostringstream out;
    out << "median query time (ms) over " << repetitions << " repetitions\n";
    out << std::setw(10) << "DB size";
    for (auto d : dims) out << std::setw(12) << ("D=" + std::to_string(d));
    out << '\n';
    out << std::fixed << std::setprecision(4);
    for (auto s : sizes) {
        out << std::setw(10) << s;
        for (auto d : dims) out << std::setw(12) << cell(s, d).median_ms;
        out << '\n';
    }
    return out.str();
}

std::string TimingReport::to_json() const {
    nlohmann::json j;
    j["repetitions"] = repetitions;
    j["sizes"] = sizes;
    j["dims"] = dims;
    auto arr = nlohmann::json::array();
    for (const auto& c : cells) {
        arr.push_back({{"size", c.size}, {"dim", c.dim}, {"median_ms", c.median_ms}, {"mean_ms", c.mean_ms}});
    }
    j["cells"] = std::move(arr);
    return j.dump(2) + "\n";
}

TimingReport benchmark_search(std::span<const std::size_t> sizes, std::span<const std::size_t> dims,
                              std::size_t repetitions, std::uint64_t seed) {
    using Clock = std::chrono::steady_clock;
    if (repetitions == 0) fail(ErrorKind::Usage, "benchmark needs at least one repetition");
    TimingReport report;
    report.sizes.assign(sizes.begin(), sizes.end());
    report.dims.assign(dims.begin(), dims.end());
    report.repetitions = repetitions;
    report.cells.resize(sizes.size() * dims.size());

    const std::size_t max_size = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    volatile double sink = 0.0;

    struct Cell {
        Index index;
        std::size_t batch = 1;
        std::vector<double> per_query_ms;
    };
    std::vector<Cell> cells(report.cells.size());
    std::vector<std::vector<float>> queries(dims.size());

    auto run_batch = [&](const Cell& cell, const std::vector<float>& query, std::size_t count) {
        const auto start = Clock::now();
        for (std::size_t q = 0; q < count; ++q) sink = sink + search(cell.index, query, 20).front().distance;
        return std::chrono::duration<double>(Clock::now() - start).count();
    };

    for (std::size_t di = 0; di < dims.size(); ++di) {
        const std::size_t dim = dims[di];
        std::vector<GlobalDescriptor> pool(max_size);
        for (std::size_t i = 0; i < max_size; ++i) {
            pool[i].image_id = "img" + std::to_string(i);
            pool[i].values.resize(dim);
            for (float& x : pool[i].values) x = gauss(rng);
            pool[i].normalized = l2_normalize(pool[i].values);
        }
        queries[di].resize(dim);
        for (float& x : queries[di]) x = gauss(rng);
        l2_normalize(queries[di]);
        for (std::size_t si = 0; si < sizes.size(); ++si) {
            Cell& cell = cells[si * dims.size() + di];
            cell.index = build_index(std::span(pool).first(sizes[si]));
            const double single = std::max(run_batch(cell, queries[di], 1), 1e-9);
            cell.batch = static_cast<std::size_t>(std::ceil(kMinBatchSeconds / single));
            (void)run_batch(cell, queries[di], cell.batch);  // warm-up
        }
    }

    // Repetitions go round-robin over the cells so a transient slowdown of
    // the machine spreads across the grid instead of landing on one cell.
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            Cell& cell = cells[c];
            const double secs = run_batch(cell, queries[c % dims.size()], cell.batch);
            cell.per_query_ms.push_back(secs * 1e3 / static_cast<double>(cell.batch));
        }
    }

    for (std::size_t c = 0; c < cells.size(); ++c) {
        auto& t = cells[c].per_query_ms;
        double mean = 0.0;
        for (double v : t) mean += v;
        mean /= static_cast<double>(repetitions);
        std::sort(t.begin(), t.end());
        const std::size_t mid = repetitions / 2;
        const double median = repetitions % 2 == 1 ? t[mid] : 0.5 * (t[mid - 1] + t[mid]);
        report.cells[c] = {sizes[c / dims.size()], dims[c % dims.size()], median, mean};
    }
    return report;
}

}  // namespace rsir
