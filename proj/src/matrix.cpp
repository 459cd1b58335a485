#include "stackcast/matrix.hpp"

#include "stackcast/errors.hpp"

#include <cblas.h>

extern "C" void openblas_set_num_threads(int);

namespace stackcast {

namespace {

// BLAS is pinned to one thread: the summation order inside dgemm is then
// fixed, which keeps training runs bitwise reproducible.
struct BlasSingleThread {
    BlasSingleThread() { openblas_set_num_threads(1); }
};
const BlasSingleThread blas_init;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
    }
}

} // namespace

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
        if (row.size() != m.cols()) throw ShapeMismatch("from_rows: ragged rows");
        std::size_t c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double scalar) {
    for (double& v : data_) v *= scalar;
    return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix lhs, double scalar) { return lhs *= scalar; }

namespace {

void gemm(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b, Matrix& c, double beta) {
    const std::size_t m = trans_a ? a.cols() : a.rows();
    const std::size_t k = trans_a ? a.rows() : a.cols();
    const std::size_t kb = trans_b ? b.cols() : b.rows();
    const std::size_t n = trans_b ? b.rows() : b.cols();
    if (k != kb) {
        throw ShapeMismatch("matmul: inner dimensions " + std::to_string(k) + " vs " +
                            std::to_string(kb));
    }
    if (c.rows() != m || c.cols() != n) throw ShapeMismatch("matmul: output shape");
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m), static_cast<int>(n),
                static_cast<int>(k), 1.0, a.data(), static_cast<int>(a.cols()), b.data(),
                static_cast<int>(b.cols()), beta, c.data(), static_cast<int>(c.cols()));
}

} // namespace

Matrix matmul(const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    Matrix c(trans_a ? a.cols() : a.rows(), trans_b ? b.rows() : b.cols());
    gemm(a, trans_a, b, trans_b, c, 0.0);
    return c;
}

void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b, bool trans_a, bool trans_b) {
    gemm(a, trans_a, b, trans_b, c, 1.0);
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.entries()[i] *= b.entries()[i];
    return out;
}

Matrix add_row_vector(const Matrix& m, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != m.cols()) throw ShapeMismatch("add_row_vector");
    Matrix out = m;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) += row(0, c);
    return out;
}

Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += m(r, c);
    return out;
}

} // namespace stackcast
