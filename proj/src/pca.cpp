#include "rsir/pca.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "binary_io.hpp"
#include "rsir/error.hpp"
#include "rsir/simd/kernels.hpp"

namespace rsir {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void fix_sign(std::span<double> component) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < component.size(); ++i) {
        if (std::abs(component[i]) > std::abs(component[arg])) arg = i;
    }
    if (component[arg] < 0.0) {
        for (double& x : component) x = -x;
    }
}

// Fills rows [from, d_out) with unit vectors orthogonal to every earlier row,
// drawn from the standard basis in index order.
void complete_basis(DoubleMatrix& comps, std::size_t from) {
    const std::size_t d = comps.cols();
    std::size_t basis = 0;
    for (std::size_t r = from; r < comps.rows(); ++r) {
        for (; basis < d; ++basis) {
            std::vector<double> v(d, 0.0);
            v[basis] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t q = 0; q < r; ++q) {
                    const auto c = comps.row(q);
                    double proj = 0.0;
                    for (std::size_t i = 0; i < d; ++i) proj += c[i] * v[i];
                    for (std::size_t i = 0; i < d; ++i) v[i] -= proj * c[i];
                }
            }
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            if (norm < 0.5) continue;
            auto out = comps.row(r);
            for (std::size_t i = 0; i < d; ++i) out[i] = v[i] / norm;
            ++basis;
            break;
        }
    }
}

void check_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        fail(ErrorKind::Dimension, std::string(what) + ": expected length " + std::to_string(want) +
                                       ", found " + std::to_string(got));
    }
}

}  // namespace

std::string_view to_string(PcaLevel level) noexcept {
    switch (level) {
        case PcaLevel::None: return "none";
        case PcaLevel::Feature: return "feature";
        case PcaLevel::Global: return "global";
    }
    return "none";
}

PcaLevel parse_pca_level(std::string_view text) {
    if (text == "none") return PcaLevel::None;
    if (text == "feature") return PcaLevel::Feature;
    if (text == "global") return PcaLevel::Global;
    fail(ErrorKind::Usage, "unknown PCA level \"" + std::string(text) + "\" (none|feature|global)");
}

PcaModel fit_pca(const FloatMatrix& vectors, std::size_t d_out) {
    const std::size_t n = vectors.rows();
    const std::size_t d = vectors.cols();
    if (d_out == 0) fail(ErrorKind::Usage, "PCA output dimension must be at least 1");
    if (d_out > d) {
        fail(ErrorKind::Usage, "PCA output dimension " + std::to_string(d_out) +
                                   " exceeds input dimension " + std::to_string(d));
    }
    if (n < d_out) {
        fail(ErrorKind::InsufficientData, "PCA needs at least " + std::to_string(d_out) +
                                              " samples, have " + std::to_string(n));
    }
    for (float x : vectors.values()) {
        if (!std::isfinite(x)) fail(ErrorKind::Data, "non-finite value in PCA training data");
    }

    PcaModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = vectors.row(r);
        for (std::size_t i = 0; i < d; ++i) model.mean[i] += row[i];
    }
    for (double& m : model.mean) m /= static_cast<double>(n);

    MatrixXd centered(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = vectors.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            centered(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = row[i] - model.mean[i];
        }
    }
    const double denom = static_cast<double>(std::max<std::size_t>(n, 2) - 1);

    model.components = DoubleMatrix(d_out, d);
    model.explained_variance.assign(d_out, 0.0);
    std::size_t filled = 0;

    if (d <= n) {
        const MatrixXd cov = (centered.transpose() * centered) / denom;
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
        const auto& values = eig.eigenvalues();    // ascending
        const auto& vecs = eig.eigenvectors();
        for (std::size_t j = 0; j < d_out; ++j) {
            const auto col = static_cast<Eigen::Index>(d - 1 - j);
            model.explained_variance[j] = std::max(0.0, values(col));
            auto out = model.components.row(j);
            for (std::size_t i = 0; i < d; ++i) out[i] = vecs(static_cast<Eigen::Index>(i), col);
        }
        filled = d_out;
    } else {
        // Dual route: eigenvectors of X X^T map to covariance eigenvectors via X^T u.
        const MatrixXd gram = (centered * centered.transpose()) / denom;
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
        const auto& values = eig.eigenvalues();
        const auto& vecs = eig.eigenvectors();
        const double top = std::max(0.0, values(static_cast<Eigen::Index>(n - 1)));
        const double floor = top * static_cast<double>(n) * 1e-12;
        for (std::size_t j = 0; j < d_out && j < n; ++j) {
            const auto col = static_cast<Eigen::Index>(n - 1 - j);
            const double lambda = values(col);
            if (!(lambda > floor)) break;
            VectorXd comp = centered.transpose() * vecs.col(col);
            comp /= comp.norm();
            model.explained_variance[j] = lambda;
            auto out = model.components.row(j);
            for (std::size_t i = 0; i < d; ++i) out[i] = comp(static_cast<Eigen::Index>(i));
            filled = j + 1;
        }
        complete_basis(model.components, filled);
    }
    for (std::size_t j = 0; j < d_out; ++j) fix_sign(model.components.row(j));
    return model;
}

std::vector<float> project(std::span<const float> v, const PcaModel& model) {
    check_dim(v.size(), model.d_in(), "PCA projection input");
    std::vector<double> centered(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) centered[i] = static_cast<double>(v[i]) - model.mean[i];
    const auto& kern = simd::active();
    std::vector<float> out(model.d_out());
    for (std::size_t j = 0; j < model.d_out(); ++j) {
        out[j] = static_cast<float>(kern.dot_dd(model.components.row(j).data(), centered.data(), v.size()));
    }
    return out;
}

FloatMatrix project_rows(const FloatMatrix& rows, const PcaModel& model) {
    FloatMatrix out(0, model.d_out());
    out.reserve_rows(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out.append_row(std::span<const float>(project(rows.row(r), model)));
    return out;
}

DescriptorSet project_set(const DescriptorSet& set, const PcaModel& model) {
    DescriptorSet out(model.d_out(), set.image_id(), set.class_label());
    for (std::size_t i = 0; i < set.size(); ++i) out.add(project(set.vector(i), model), set.meta(i));
    return out;
}

GlobalDescriptor project_global(const GlobalDescriptor& global, const PcaModel& model) {
    GlobalDescriptor out;
    out.image_id = global.image_id;
    out.values = project(global.values, model);
    out.normalized = l2_normalize(out.values);
    return out;
}

std::vector<double> back_project(std::span<const float> y, const PcaModel& model) {
    check_dim(y.size(), model.d_out(), "PCA back-projection input");
    std::vector<double> out = model.mean;
    for (std::size_t j = 0; j < model.d_out(); ++j) {
        const auto c = model.components.row(j);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += static_cast<double>(y[j]) * c[i];
    }
    return out;
}

double reconstruction_mse(const FloatMatrix& rows, const PcaModel& model) {
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        const auto x = rows.row(r);
        const auto rec = back_project(project(x, model), model);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = static_cast<double>(x[i]) - rec[i];
            total += e * e;
        }
    }
    return total / static_cast<double>(rows.rows());
}

std::string encode_pca(const PcaModel& model) {
    io::ByteWriter w;
    w.bytes({kPcaMagic, 8});
    w.put<std::uint16_t>(kPcaVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.d_in()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(model.d_out()));
    w.put_all(std::span<const double>(model.mean));
    w.put_all(std::span<const double>(model.components.values()));
    w.put_all(std::span<const double>(model.explained_variance));
    return w.buffer();
}

PcaModel decode_pca(std::string bytes, const std::string& source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic({kPcaMagic, 8});
    const auto version = r.get<std::uint16_t>("version");
    if (version != kPcaVersion) {
        fail(ErrorKind::Format, source + ": unsupported PCA version " + std::to_string(version));
    }
    const auto d_in = r.get<std::uint32_t>("d_in");
    const auto d_out = r.get<std::uint32_t>("d_out");
    if (d_in == 0 || d_out == 0 || d_out > d_in) {
        fail(ErrorKind::Format, source + ": invalid PCA shape " + std::to_string(d_out) + "x" +
                                    std::to_string(d_in));
    }
    PcaModel m;
    m.mean.resize(d_in);
    r.get_all(std::span<double>(m.mean), "mean");
    std::vector<double> comps(static_cast<std::size_t>(d_in) * d_out);
    r.get_all(std::span<double>(comps), "components");
    m.components = DoubleMatrix(d_out, d_in, std::move(comps));
    m.explained_variance.resize(d_out);
    r.get_all(std::span<double>(m.explained_variance), "variances");
    r.expect_end();
    return m;
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
    io::write_file(path, encode_pca(model));
}

PcaModel load_pca(const std::filesystem::path& path) {
    return decode_pca(io::read_file(path), path.string());
}

}  // namespace rsir
