#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace stackcast {

// Dense row-major matrix of 64-bit reals. All numeric work in the library
// goes through this type; heavy products are routed to BLAS in matrix.cpp
// with a fixed, single-threaded reduction order so runs are reproducible.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    // Row-wise construction, e.g. Matrix::from_rows({{1,2},{3,4}}).
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& entries() { return data_; }
    const std::vector<double>& entries() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const = default;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double scalar);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix lhs, double scalar);

// C = op(a) * op(b) where op is an optional transpose.
Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false);

// c += op(a) * op(b); shapes must already agree.
void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b,
                bool trans_a = false, bool trans_b = false);

Matrix hadamard(const Matrix& a, const Matrix& b);

// Broadcast a 1 x cols row vector over every row of m.
Matrix add_row_vector(const Matrix& m, const Matrix& row);

// 1 x cols vector of column sums (used for bias gradients).
Matrix column_sums(const Matrix& m);

} // namespace stackcast
