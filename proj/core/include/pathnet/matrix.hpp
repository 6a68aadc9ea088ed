#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathnet {

/// Dense row-major matrix of 64-bit floats. The only numeric container
/// in the library; everything (weights, biases, batches) is one of these.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }
    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    std::string shape_str() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Thrown when operand shapes do not conform; the message names both shapes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

bool all_finite(const Matrix& m) noexcept;

/// True iff every entry has the same bit pattern (distinguishes -0.0, NaN payloads).
bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept;

Matrix transpose(const Matrix& m);

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B (without forming the transpose)
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// 1 x cols row vector of column sums.
Matrix column_sums(const Matrix& m);

void add_inplace(Matrix& dst, const Matrix& src);
void scale_inplace(Matrix& m, double factor);

}  // namespace pathnet
