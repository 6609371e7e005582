#pragma once

#include <cstddef>
#include <vector>

namespace causalpanel {

// Dense row-major matrix of doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Kernels. The OpenMP variants split work over independent output elements
// and keep the per-element accumulation order identical to the serial
// reference, so results are bitwise equal for any thread count. The serial
// reference stays exported for tests and the kernel benchmark.

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_transposed_a(const Matrix& a, const Matrix& b); // a^T * b
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
} // namespace serial

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_transposed_a(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix scale(const Matrix& a, double s);
double trace(const Matrix& a);
double frobenius_norm_sq(const Matrix& a);
double one_norm(const Matrix& a); // max absolute column sum
double max_abs(const Matrix& a);
bool all_finite(const Matrix& a);

// Solves A X = B by LU with partial pivoting (A square, consumed by value).
Matrix lu_solve(Matrix a, Matrix b);

// Matrix exponential: scaling-and-squaring with the degree-13 Pade
// approximant.
Matrix expm(const Matrix& a);

} // namespace causalpanel
