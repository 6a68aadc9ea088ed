#include "pathnet/matrix.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace pathnet {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
        if (row.size() != m.cols_) {
            throw ShapeError("from_rows: ragged initializer, row " + std::to_string(r) +
                             " has " + std::to_string(row.size()) + " entries, expected " +
                             std::to_string(m.cols_));
        }
        std::size_t c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

std::string Matrix::shape_str() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_;
    return os.str();
}

bool all_finite(const Matrix& m) noexcept {
    for (double v : m.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept {
    if (!a.same_shape(b)) return false;
    if (a.size() == 0) return true;
    return std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols(), m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + a.shape_str() + " does not conform with " + b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    // i-k-j order keeps both b and c accesses contiguous.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_at_b: " + a.shape_str() + " does not conform with " +
                         b.shape_str());
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* brow = b.row_ptr(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            double* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_a_bt: " + a.shape_str() + " does not conform with " +
                         b.shape_str());
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row_ptr(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix column_sums(const Matrix& m) {
    Matrix s(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) s(0, c) += row[c];
    }
    return s;
}

void add_inplace(Matrix& dst, const Matrix& src) {
    if (!dst.same_shape(src)) {
        throw ShapeError("add_inplace: " + dst.shape_str() + " vs " + src.shape_str());
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

void scale_inplace(Matrix& m, double factor) {
    for (double& v : m.data()) v *= factor;
}

}  // namespace pathnet
