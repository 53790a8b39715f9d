// AVX2+FMA kernel variants. This TU is compiled with -mavx2 -mfma; the
// dispatcher only hands these out after a runtime CPU check.

#include "fsb/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

namespace fsb::kern::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double v_dot(const double* x, const double* y, int n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double r = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double v_sumsq(const double* x, int n) {
    __m256d acc = _mm256_setzero_pd();
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

void v_axpy(double a, const double* x, double* y, int n) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void v_scale(double a, double* x, int n) {
    const __m256d va = _mm256_set1_pd(a);
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void v_acc(double* y, const double* x, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] += x[i];
}

void v_mul(double* y, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i];
}

void v_mulacc(double* y, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                                _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a[i] * b[i];
}

void v_muladd(double* y, const double* a, const double* b, const double* c, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                                _mm256_loadu_pd(c + i)));
    for (; i < n; ++i) y[i] = a[i] * b[i] + c[i];
}

void v_fma3(double* x, const double* d, const double* cu, const double* u,
            const double* cn, const double* xi, int n) {
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(d + i), _mm256_loadu_pd(x + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(cu + i), _mm256_loadu_pd(u + i), acc);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(cn + i), _mm256_loadu_pd(xi + i), acc);
        _mm256_storeu_pd(x + i, acc);
    }
    for (; i < n; ++i) x[i] = d[i] * x[i] + cu[i] * u[i] + cn[i] * xi[i];
}

// C(MxN) += A(MxK) B(KxN): broadcast A(i,k), FMA along contiguous rows of B/C.
void v_matmul_nn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        double* ci = C + static_cast<long>(i) * N;
        const double* ai = A + static_cast<long>(i) * K;
        for (int k = 0; k < K; ++k) {
            const __m256d a = _mm256_set1_pd(ai[k]);
            const double* bk = B + static_cast<long>(k) * N;
            int j = 0;
            for (; j + 4 <= N; j += 4)
                _mm256_storeu_pd(ci + j, _mm256_fmadd_pd(a, _mm256_loadu_pd(bk + j),
                                                         _mm256_loadu_pd(ci + j)));
            for (; j < N; ++j) ci[j] += ai[k] * bk[j];
        }
    }
}

void v_matmul_nt(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* ai = A + static_cast<long>(i) * K;
        double* ci = C + static_cast<long>(i) * N;
        for (int j = 0; j < N; ++j) ci[j] += v_dot(ai, B + static_cast<long>(j) * K, K);
    }
}

void v_matmul_tn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int m = 0; m < M; ++m) {
        const double* am = A + static_cast<long>(m) * K;
        const double* bm = B + static_cast<long>(m) * N;
        for (int k = 0; k < K; ++k) {
            const __m256d a = _mm256_set1_pd(am[k]);
            double* ck = C + static_cast<long>(k) * N;
            int j = 0;
            for (; j + 4 <= N; j += 4)
                _mm256_storeu_pd(ck + j, _mm256_fmadd_pd(a, _mm256_loadu_pd(bm + j),
                                                         _mm256_loadu_pd(ck + j)));
            for (; j < N; ++j) ck[j] += am[k] * bm[j];
        }
    }
}

}  // namespace

const Impl avx2_impl = {
    "avx2",   v_dot,    v_sumsq,     v_axpy,      v_scale,     v_acc, v_mul,
    v_mulacc, v_muladd, v_fma3,      v_matmul_nn, v_matmul_nt, v_matmul_tn,
};

}  // namespace fsb::kern::detail

#endif  // __x86_64__
