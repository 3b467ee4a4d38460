#pragma once

#include <cstddef>
#include <vector>

namespace modno {

// Dense row-major f64 matrix, the universal numeric carrier.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0);

    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    double* row_ptr(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
    const double* row_ptr(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
};

bool operator==(const Matrix& a, const Matrix& b);

Matrix matmul(const Matrix& a, const Matrix& b);     // a · b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a · bᵀ
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // aᵀ · b
Matrix transpose(const Matrix& a);

// y += alpha * x, shapes must agree
void axpy(double alpha, const Matrix& x, Matrix& y);
void scale(Matrix& a, double alpha);

// Copy the given rows of `a` into a new matrix, in index order.
Matrix gather_rows(const Matrix& a, const std::vector<int>& rows);

// Set the BLAS thread count explicitly. Without a call, the first matrix
// product pins BLAS to one thread for reproducible timing.
void set_blas_threads(int n);

}  // namespace modno
