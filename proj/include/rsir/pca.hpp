#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rsir/descriptor.hpp"
#include "rsir/matrix.hpp"
#include "rsir/vlad.hpp"

namespace rsir {

/// Where a PCA model is applied: to local features before the codebook
/// (the codebook then lives in the reduced space), or to finished VLAD
/// vectors (re-normalized after projection).
enum class PcaLevel { None, Feature, Global };

std::string_view to_string(PcaLevel level) noexcept;
PcaLevel parse_pca_level(std::string_view text);

/// Principal components, no whitening. Rows of `components` are orthonormal and
/// ordered by explained variance, descending. Each component's sign is fixed
/// so that its largest-magnitude entry is positive.
struct PcaModel {
    std::vector<double> mean;               // d_in
    DoubleMatrix components;                // d_out x d_in
    std::vector<double> explained_variance; // d_out

    std::size_t d_in() const noexcept { return components.cols(); }
    std::size_t d_out() const noexcept { return components.rows(); }

    bool operator==(const PcaModel&) const = default;
};

/// Fits on the rows of `vectors` with the 1/(n-1) sample covariance. When
/// d_in exceeds the sample count the n x n Gram matrix is decomposed instead.
/// Throws InsufficientData when rows < d_out, Usage when d_out is 0 or > d_in.
PcaModel fit_pca(const FloatMatrix& vectors, std::size_t d_out);

/// components * (v - mean). Throws Dimension on length mismatch.
std::vector<float> project(std::span<const float> v, const PcaModel& model);
FloatMatrix project_rows(const FloatMatrix& rows, const PcaModel& model);

/// Projects every descriptor vector; metadata and order are kept.
DescriptorSet project_set(const DescriptorSet& set, const PcaModel& model);

/// Projection of a VLAD vector, re-L2-normalized.
GlobalDescriptor project_global(const GlobalDescriptor& global, const PcaModel& model);

/// Inverse map back to the input space: mean + components^T * y.
std::vector<double> back_project(std::span<const float> y, const PcaModel& model);

/// Mean over rows of the squared reconstruction error.
double reconstruction_mse(const FloatMatrix& rows, const PcaModel& model);

/// "RSIRPCA0" | u16 version=1 | u32 d_in | u32 d_out | d_in f64 mean |
/// d_out*d_in f64 components (row-major) | d_out f64 variances
inline constexpr char kPcaMagic[] = "RSIRPCA0";
inline constexpr std::uint16_t kPcaVersion = 1;

std::string encode_pca(const PcaModel& model);
PcaModel decode_pca(std::string bytes, const std::string& source);
void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace rsir
