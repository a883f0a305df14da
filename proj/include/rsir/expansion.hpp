#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rsir/engine.hpp"
#include "rsir/linalg.hpp"
#include "rsir/matrix.hpp"
#include "rsir/vlad.hpp"

namespace rsir {

/// How the expanded query is built from the query and its top candidates.
/// PSum adds the members; PInv uses the pseudo-inverse of the member matrix,
/// which down-weights directions shared by several members.
enum class ExpansionMethod { None, PSum, PInv };

std::string_view to_string(ExpansionMethod method) noexcept;
ExpansionMethod parse_expansion(std::string_view text);

/// M global descriptors of length D, held as the columns of a D x M matrix.
class DescriptorGroup {
public:
    /// Throws Data when empty or non-finite, Dimension on unequal lengths.
    explicit DescriptorGroup(std::span<const std::vector<float>> members);
    explicit DescriptorGroup(std::span<const std::vector<double>> members);
    explicit DescriptorGroup(DoubleMatrix columns);

    std::size_t length() const noexcept { return matrix_.rows(); }
    std::size_t members() const noexcept { return matrix_.cols(); }
    const DoubleMatrix& matrix() const noexcept { return matrix_; }

private:
    void check() const;

    DoubleMatrix matrix_;
};

/// Column sum G * 1.
std::vector<double> psum(const DescriptorGroup& group);

struct MemoryVector {
    std::vector<double> values;
    bool degenerate = false;  // all-zero group
};

/// (G^+)^T * 1. For orthonormal members this equals psum; for a single member
/// v it is v / |v|^2.
MemoryVector pinv_mv(const DescriptorGroup& group);

/// Memory vector of {query} followed by `candidates`, re-L2-normalized. With no
/// candidates, or method None, the query is returned unchanged.
GlobalDescriptor expand_query(const GlobalDescriptor& query, std::span<const GlobalDescriptor> candidates,
                              ExpansionMethod method);

inline constexpr std::size_t kExpansionDepth = 3;

struct ExpansionOptions {
    ExpansionMethod method = ExpansionMethod::PSum;
    std::size_t top_k = 20;
    std::size_t depth = kExpansionDepth;
    /// Exclude the query's own row (matched by image id) from both passes.
    bool leave_one_out = true;
};

/// Pass 1 ranks the index for the `depth` best candidates; pass 2 ranks it
/// again with the expanded query. Returns the pass-2 list. Method None makes a
/// single pass.
RankedList query_with_expansion(const Index& index, const GlobalDescriptor& query,
                                const ExpansionOptions& options);

}  // namespace rsir
