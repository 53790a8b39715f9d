// Scalar reference kernels. The SIMD variants must match these within
// reassociation error; correctness tests pin this file as the oracle.

#include "fsb/kernels.hpp"

namespace fsb::kern::detail {
namespace {

double s_dot(const double* x, const double* y, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double s_sumsq(const double* x, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void s_axpy(double a, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(double a, double* x, int n) {
    for (int i = 0; i < n; ++i) x[i] *= a;
}

void s_acc(double* y, const double* x, int n) {
    for (int i = 0; i < n; ++i) y[i] += x[i];
}

void s_mul(double* y, const double* a, const double* b, int n) {
    for (int i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

void s_mulacc(double* y, const double* a, const double* b, int n) {
    for (int i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void s_muladd(double* y, const double* a, const double* b, const double* c, int n) {
    for (int i = 0; i < n; ++i) y[i] = a[i] * b[i] + c[i];
}

void s_fma3(double* x, const double* d, const double* cu, const double* u,
            const double* cn, const double* xi, int n) {
    for (int i = 0; i < n; ++i) x[i] = d[i] * x[i] + cu[i] * u[i] + cn[i] * xi[i];
}

void s_matmul_nn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        double* ci = C + static_cast<long>(i) * N;
        const double* ai = A + static_cast<long>(i) * K;
        for (int k = 0; k < K; ++k) {
            const double a = ai[k];
            const double* bk = B + static_cast<long>(k) * N;
            for (int j = 0; j < N; ++j) ci[j] += a * bk[j];
        }
    }
}

void s_matmul_nt(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* ai = A + static_cast<long>(i) * K;
        double* ci = C + static_cast<long>(i) * N;
        for (int j = 0; j < N; ++j) ci[j] += s_dot(ai, B + static_cast<long>(j) * K, K);
    }
}

void s_matmul_tn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int m = 0; m < M; ++m) {
        const double* am = A + static_cast<long>(m) * K;
        const double* bm = B + static_cast<long>(m) * N;
        for (int k = 0; k < K; ++k) {
            const double a = am[k];
            double* ck = C + static_cast<long>(k) * N;
            for (int j = 0; j < N; ++j) ck[j] += a * bm[j];
        }
    }
}

}  // namespace

const Impl scalar_impl = {
    "scalar", s_dot,    s_sumsq,     s_axpy,      s_scale,     s_acc, s_mul,
    s_mulacc, s_muladd, s_fma3,      s_matmul_nn, s_matmul_nt, s_matmul_tn,
};

}  // namespace fsb::kern::detail
