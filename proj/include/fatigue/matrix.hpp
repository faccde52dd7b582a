#pragma once

#include <cstddef>
#include <vector>

namespace fatigue {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        data.assign(r * c, 0.0);
    }

    bool same_shape(const Matrix& o) const {
        return rows == o.rows && cols == o.cols;
    }
};

Matrix transpose(const Matrix& m);

/// Z = W * A, plus bias broadcast over columns. W is m x k, A is k x n,
/// bias has m entries, Z must already be m x n.
void matmul_bias(const Matrix& W, const Matrix& A, const std::vector<double>& bias,
                 Matrix& Z);

/// Out = W^T * D. W is m x k, D is m x n, Out must be k x n.
void matmul_at_b(const Matrix& W, const Matrix& D, Matrix& Out);

/// Out = D * A^T. D is m x n, A is k x n, Out must be m x k.
void matmul_a_bt(const Matrix& D, const Matrix& A, Matrix& Out);

/// out[i] = sum over columns of row i. out must have m entries.
void row_sums(const Matrix& m, std::vector<double>& out);

/// True when every entry is finite.
bool all_finite(const double* p, std::size_t n);
bool all_finite(const Matrix& m);

} // namespace fatigue
