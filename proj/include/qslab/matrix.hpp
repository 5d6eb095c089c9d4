#pragma once

#include <cstddef>
#include <vector>

namespace qslab {

// Minimal dense row-major matrix. Sized for the small systems used here
// (chain kernels and symmetric test instances, n <= ~12).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

// Row vector times matrix: (v^T M)_j = sum_i v_i M_ij.
std::vector<double> row_times(const std::vector<double>& v, const Matrix& m);

// Eigendecomposition of a symmetric matrix: values ascending, eigenvectors
// stored as the columns of `vectors`, orthonormal.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

// Cyclic Jacobi rotations. Sweeps until the off-diagonal Frobenius norm drops
// below off_tol relative to the Frobenius norm of the input.
SymmetricEigen jacobi_eigensolve(const Matrix& a, double off_tol = 1e-13,
                                 int max_sweeps = 200);

} // namespace qslab
