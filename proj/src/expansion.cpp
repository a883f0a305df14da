#include "rsir/expansion.hpp"

#include <cmath>

#include "rsir/error.hpp"

namespace rsir {
namespace {

template <typename T>
DoubleMatrix columns_from(std::span<const std::vector<T>> members) {
    if (members.empty()) fail(ErrorKind::Data, "descriptor group needs at least one member");
    const std::size_t len = members.front().size();
    DoubleMatrix g(len, members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (members[m].size() != len) {
            fail(ErrorKind::Dimension, "descriptor group members differ in length (" +
                                           std::to_string(len) + " vs " +
                                           std::to_string(members[m].size()) + ")");
        }
        for (std::size_t i = 0; i < len; ++i) g(i, m) = static_cast<double>(members[m][i]);
    }
    return g;
}

}  // namespace

std::string_view to_string(ExpansionMethod method) noexcept {
    switch (method) {
        case ExpansionMethod::None: return "none";
        case ExpansionMethod::PSum: return "psum";
        case ExpansionMethod::PInv: return "pinv";
    }
    return "none";
}

ExpansionMethod parse_expansion(std::string_view text) {
    if (text == "none") return ExpansionMethod::None;
    if (text == "psum") return ExpansionMethod::PSum;
    if (text == "pinv") return ExpansionMethod::PInv;
    fail(ErrorKind::Usage, "unknown expansion method \"" + std::string(text) + "\" (none|psum|pinv)");
}

DescriptorGroup::DescriptorGroup(std::span<const std::vector<float>> members)
    : matrix_(columns_from(members)) {
    check();
}

DescriptorGroup::DescriptorGroup(std::span<const std::vector<double>> members)
    : matrix_(columns_from(members)) {
    check();
}

DescriptorGroup::DescriptorGroup(DoubleMatrix columns) : matrix_(std::move(columns)) { check(); }

void DescriptorGroup::check() const {
    if (matrix_.cols() == 0) fail(ErrorKind::Data, "descriptor group needs at least one member");
    for (double x : matrix_.values()) {
        if (!std::isfinite(x)) fail(ErrorKind::Data, "descriptor group has non-finite entries");
    }
}

std::vector<double> psum(const DescriptorGroup& group) {
    const auto& g = group.matrix();
    std::vector<double> out(g.rows(), 0.0);
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (double x : g.row(i)) out[i] += x;
    }
    return out;
}

MemoryVector pinv_mv(const DescriptorGroup& group) {
    // (G^+)^T 1 is the sum of the rows of G^+ (M x D).
    const DoubleMatrix pinv = linalg::pseudo_inverse(group.matrix());
    MemoryVector mv;
    mv.values.assign(group.length(), 0.0);
    for (std::size_t m = 0; m < pinv.rows(); ++m) {
        const auto row = pinv.row(m);
        for (std::size_t i = 0; i < row.size(); ++i) mv.values[i] += row[i];
    }
    mv.degenerate = linalg::frobenius_norm(group.matrix()) == 0.0;
    return mv;
}

GlobalDescriptor expand_query(const GlobalDescriptor& query, std::span<const GlobalDescriptor> candidates,
                              ExpansionMethod method) {
    if (candidates.empty() || method == ExpansionMethod::None) return query;
    std::vector<std::vector<float>> members;
    members.reserve(candidates.size() + 1);
    members.push_back(query.values);
    for (const auto& c : candidates) members.push_back(c.values);
    const DescriptorGroup group{std::span<const std::vector<float>>(members)};

    const std::vector<double> fused =
        method == ExpansionMethod::PSum ? psum(group) : pinv_mv(group).values;
    return make_global(query.image_id, fused, true);
}

RankedList query_with_expansion(const Index& index, const GlobalDescriptor& query,
                                const ExpansionOptions& options) {
    std::optional<std::size_t> self;
    if (options.leave_one_out) self = index.find(query.image_id);

    if (options.method == ExpansionMethod::None || options.depth == 0) {
        return search(index, query.values, options.top_k, self);
    }

    const RankedList first = search(index, query.values, options.depth, self);
    std::vector<GlobalDescriptor> top;
    top.reserve(first.size());
    for (const auto& e : first) {
        const auto row = index.row(e.row);
        top.push_back({e.image_id, std::vector<float>(row.begin(), row.end()), true});
    }
    const GlobalDescriptor expanded = expand_query(query, top, options.method);
    return search(index, expanded.values, options.top_k, self);
}

}  // namespace rsir
