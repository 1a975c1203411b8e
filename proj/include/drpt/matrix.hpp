#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drpt/error.hpp"

namespace drpt {

// Dense real matrix, row-major. Entries are validated finite on
// construction; datasets awaiting imputation use with_missing() and carry
// NaN as the missing marker.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        check_shape();
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw ValidationError("matrix entry is not finite");
            }
        }
    }

    static Matrix with_missing(std::size_t rows, std::size_t cols,
                               std::vector<double> data) {
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.data_ = std::move(data);
        m.check_shape();
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = at(i, j);
        return out;
    }

    bool has_non_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return true;
        }
        return false;
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void check_shape() const {
        if (data_.size() != rows_ * cols_) {
            throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace drpt
