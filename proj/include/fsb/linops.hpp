#pragma once

// Thin wrappers routing row-major matrix-vector products through the
// dispatched kernels.

#include "fsb/eigensystem.hpp"
#include "fsb/kernels.hpp"

namespace fsb {

// y = A x
inline void gemv(const MatrixRM& A, const double* x, double* y) {
    const auto& k = kern::active();
    const int M = static_cast<int>(A.rows()), N = static_cast<int>(A.cols());
    for (int i = 0; i < M; ++i) y[i] = k.dot(A.data() + static_cast<long>(i) * N, x, N);
}

// y = A^T x (accumulated row by row, so y stays contiguous)
inline void gemv_t(const MatrixRM& A, const double* x, double* y) {
    const auto& k = kern::active();
    const int M = static_cast<int>(A.rows()), N = static_cast<int>(A.cols());
    for (int j = 0; j < N; ++j) y[j] = 0.0;
    for (int i = 0; i < M; ++i) k.axpy(x[i], A.data() + static_cast<long>(i) * N, y, N);
}

}  // namespace fsb
