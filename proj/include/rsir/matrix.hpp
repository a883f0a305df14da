#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsir {

/// Dense row-major matrix with contiguous storage. Rows are the unit of work
/// for every kernel in the library (one descriptor, one centroid, one image).
template <typename T>
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept {
        return data_[r * cols_ + c];
    }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }
    const std::vector<T>& values() const noexcept { return data_; }
    std::span<T> values() noexcept { return {data_.data(), data_.size()}; }

    /// Appends one row; the first append on an empty 0-column matrix fixes cols.
    void append_row(std::span<const T> values) {
        if (rows_ == 0 && cols_ == 0) cols_ = values.size();
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using FloatMatrix = DenseMatrix<float>;
using DoubleMatrix = DenseMatrix<double>;

}  // namespace rsir
