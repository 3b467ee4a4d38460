#include "modno/matrix.hpp"

#include <cblas.h>

#include <cmath>
#include <mutex>
#include <string>

#include "modno/errors.hpp"

extern "C" void openblas_set_num_threads(int);

namespace modno {
namespace {

std::once_flag g_blas_pin_once;

// Pin BLAS to one thread: keeps results independent of machine load and leaves
// the cores to the sample-level parallelism in the harness.
void ensure_blas_single_thread() {
    std::call_once(g_blas_pin_once, [] { openblas_set_num_threads(1); });
}

void check_mul_shapes(int a_cols, int b_rows, const char* what) {
    if (a_cols != b_rows) {
        throw ShapeError(std::string(what) + ": inner dimensions disagree (" +
                         std::to_string(a_cols) + " vs " + std::to_string(b_rows) + ")");
    }
}

}  // namespace

Matrix::Matrix(int r, int c, double fill) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
    data.assign(static_cast<std::size_t>(r) * c, fill);
}

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.rows, "matmul");
    ensure_blas_single_thread();
    Matrix c(a.rows, b.cols);
    if (a.rows == 0 || b.cols == 0 || a.cols == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, a.rows, b.cols, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.cols, b.cols, "matmul_nt");
    ensure_blas_single_thread();
    Matrix c(a.rows, b.rows);
    if (a.rows == 0 || b.rows == 0 || a.cols == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, a.rows, b.rows, a.cols, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    check_mul_shapes(a.rows, b.rows, "matmul_tn");
    ensure_blas_single_thread();
    Matrix c(a.cols, b.cols);
    if (a.cols == 0 || b.cols == 0 || a.rows == 0) return c;
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, a.cols, b.cols, a.rows, 1.0,
                a.data.data(), a.cols, b.data.data(), b.cols, 0.0, c.data.data(), c.cols);
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
    if (!x.same_shape(y)) throw ShapeError("axpy: shape mismatch");
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] += alpha * x.data[i];
}

void scale(Matrix& a, double alpha) {
    for (double& v : a.data) v *= alpha;
}

Matrix gather_rows(const Matrix& a, const std::vector<int>& rows) {
    Matrix out(static_cast<int>(rows.size()), a.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        int src = rows[r];
        if (src < 0 || src >= a.rows) throw IndexError("gather_rows: row index out of range");
        for (int j = 0; j < a.cols; ++j) out(static_cast<int>(r), j) = a(src, j);
    }
    return out;
}

void set_blas_threads(int n) {
    if (n < 1) throw ConfigError("set_blas_threads: thread count must be >= 1");
    // Consume the pin slot so a later matrix product does not override the choice.
    std::call_once(g_blas_pin_once, [] {});
    openblas_set_num_threads(n);
}

}  // namespace modno
