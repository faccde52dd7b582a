#include "fatigue/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fatigue {

namespace {

constexpr std::size_t kTile = 16;

// z[0..n) = init + sum over t of coeff[t * cstride] * S.row(t).
// Column-tiled so the accumulator block stays in registers across the
// whole reduction. coeff stride 1 walks a row of W, stride W.cols a column.
void accumulate_one(double* __restrict z, std::size_t n, const double* coeff,
                    std::size_t cstride, const Matrix& S, double init) {
    const std::size_t nt = S.rows;
    std::size_t j0 = 0;
    for (; j0 + kTile <= n; j0 += kTile) {
        double acc[kTile];
        for (std::size_t u = 0; u < kTile; ++u) acc[u] = init;
        for (std::size_t t = 0; t < nt; ++t) {
            const double c = coeff[t * cstride];
            const double* __restrict a = S.row(t) + j0;
#pragma omp simd
            for (std::size_t u = 0; u < kTile; ++u) acc[u] += c * a[u];
        }
        for (std::size_t u = 0; u < kTile; ++u) z[j0 + u] = acc[u];
    }
    if (j0 < n) {
        const std::size_t jw = n - j0;
        double acc[kTile];
        for (std::size_t u = 0; u < jw; ++u) acc[u] = init;
        for (std::size_t t = 0; t < nt; ++t) {
            const double c = coeff[t * cstride];
            const double* __restrict a = S.row(t) + j0;
#pragma omp simd
            for (std::size_t u = 0; u < jw; ++u) acc[u] += c * a[u];
        }
        for (std::size_t u = 0; u < jw; ++u) z[j0 + u] = acc[u];
    }
}

// Two-row variant: shares the S.row loads between two output rows, which
// roughly doubles FMA throughput on wide cores.
void accumulate_two(double* __restrict z0, double* __restrict z1, std::size_t n,
                    const double* coeff0, const double* coeff1, std::size_t cstride,
                    const Matrix& S, double init0, double init1) {
    const std::size_t nt = S.rows;
    std::size_t j0 = 0;
    for (; j0 + kTile <= n; j0 += kTile) {
        double acc0[kTile];
        double acc1[kTile];
        for (std::size_t u = 0; u < kTile; ++u) {
            acc0[u] = init0;
            acc1[u] = init1;
        }
        for (std::size_t t = 0; t < nt; ++t) {
            const double c0 = coeff0[t * cstride];
            const double c1 = coeff1[t * cstride];
            const double* __restrict a = S.row(t) + j0;
#pragma omp simd
            for (std::size_t u = 0; u < kTile; ++u) {
                acc0[u] += c0 * a[u];
                acc1[u] += c1 * a[u];
            }
        }
        for (std::size_t u = 0; u < kTile; ++u) {
            z0[j0 + u] = acc0[u];
            z1[j0 + u] = acc1[u];
        }
    }
    if (j0 < n) {
        const std::size_t jw = n - j0;
        double acc0[kTile];
        double acc1[kTile];
        for (std::size_t u = 0; u < jw; ++u) {
            acc0[u] = init0;
            acc1[u] = init1;
        }
        for (std::size_t t = 0; t < nt; ++t) {
            const double c0 = coeff0[t * cstride];
            const double c1 = coeff1[t * cstride];
            const double* __restrict a = S.row(t) + j0;
#pragma omp simd
            for (std::size_t u = 0; u < jw; ++u) {
                acc0[u] += c0 * a[u];
                acc1[u] += c1 * a[u];
            }
        }
        for (std::size_t u = 0; u < jw; ++u) {
            z0[j0 + u] = acc0[u];
            z1[j0 + u] = acc1[u];
        }
    }
}

void require(bool ok, const char* what) {
    if (!ok) {
        throw std::invalid_argument(what);
    }
}

} // namespace

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* src = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            out.at(c, r) = src[c];
        }
    }
    return out;
}

void matmul_bias(const Matrix& W, const Matrix& A, const std::vector<double>& bias,
                 Matrix& Z) {
    require(W.cols == A.rows, "matmul_bias: inner dimensions differ");
    require(bias.size() == W.rows, "matmul_bias: bias size mismatch");
    require(Z.rows == W.rows && Z.cols == A.cols, "matmul_bias: output shape mismatch");
    const std::size_t m = W.rows;
    const std::size_t n = A.cols;
    std::size_t i = 0;
    for (; i + 2 <= m; i += 2) {
        accumulate_two(Z.row(i), Z.row(i + 1), n, W.row(i), W.row(i + 1), 1, A,
                       bias[i], bias[i + 1]);
    }
    if (i < m) {
        accumulate_one(Z.row(i), n, W.row(i), 1, A, bias[i]);
    }
}

void matmul_at_b(const Matrix& W, const Matrix& D, Matrix& Out) {
    require(W.rows == D.rows, "matmul_at_b: inner dimensions differ");
    require(Out.rows == W.cols && Out.cols == D.cols, "matmul_at_b: output shape mismatch");
    const std::size_t k = W.cols;
    const std::size_t n = D.cols;
    std::size_t r = 0;
    for (; r + 2 <= k; r += 2) {
        accumulate_two(Out.row(r), Out.row(r + 1), n, W.data.data() + r,
                       W.data.data() + r + 1, W.cols, D, 0.0, 0.0);
    }
    if (r < k) {
        accumulate_one(Out.row(r), n, W.data.data() + r, W.cols, D, 0.0);
    }
}

void matmul_a_bt(const Matrix& D, const Matrix& A, Matrix& Out) {
    require(D.cols == A.cols, "matmul_a_bt: inner dimensions differ");
    require(Out.rows == D.rows && Out.cols == A.rows, "matmul_a_bt: output shape mismatch");
    const std::size_t m = D.rows;
    const std::size_t k = A.rows;
    const std::size_t n = D.cols;
    for (std::size_t i = 0; i < m; ++i) {
        const double* __restrict d = D.row(i);
        double* __restrict out = Out.row(i);
        std::size_t kk = 0;
        for (; kk + 2 <= k; kk += 2) {
            const double* __restrict a0 = A.row(kk);
            const double* __restrict a1 = A.row(kk + 1);
            double acc0 = 0.0;
            double acc1 = 0.0;
#pragma omp simd reduction(+ : acc0, acc1)
            for (std::size_t j = 0; j < n; ++j) {
                acc0 += d[j] * a0[j];
                acc1 += d[j] * a1[j];
            }
            out[kk] = acc0;
            out[kk + 1] = acc1;
        }
        if (kk < k) {
            const double* __restrict a0 = A.row(kk);
            double acc0 = 0.0;
#pragma omp simd reduction(+ : acc0)
            for (std::size_t j = 0; j < n; ++j) {
                acc0 += d[j] * a0[j];
            }
            out[kk] = acc0;
        }
    }
}

void row_sums(const Matrix& m, std::vector<double>& out) {
    require(out.size() == m.rows, "row_sums: output size mismatch");
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* __restrict p = m.row(r);
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t j = 0; j < m.cols; ++j) {
            acc += p[j];
        }
        out[r] = acc;
    }
}

bool all_finite(const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(p[i])) {
            return false;
        }
    }
    return true;
}

bool all_finite(const Matrix& m) {
    return all_finite(m.data.data(), m.data.size());
}

} // namespace fatigue
