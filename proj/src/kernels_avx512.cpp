// AVX-512F kernel variants (8-wide doubles, masked tails). Compiled with
// -mavx512f; handed out only after a runtime CPU check.

#include "fsb/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

namespace fsb::kern::detail {
namespace {

inline __mmask8 tail_mask(int rem) { return static_cast<__mmask8>((1u << rem) - 1u); }

double w_dot(const double* x, const double* y, int n) {
    __m512d acc0 = _mm512_setzero_pd();
    __m512d acc1 = _mm512_setzero_pd();
    int i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), acc0);
        acc1 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i + 8), _mm512_loadu_pd(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8)
        acc0 = _mm512_fmadd_pd(_mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i), acc0);
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        acc1 = _mm512_fmadd_pd(_mm512_maskz_loadu_pd(m, x + i), _mm512_maskz_loadu_pd(m, y + i),
                               acc1);
        i = n;
    }
    return _mm512_reduce_add_pd(_mm512_add_pd(acc0, acc1));
}

double w_sumsq(const double* x, int n) {
    __m512d acc = _mm512_setzero_pd();
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d v = _mm512_loadu_pd(x + i);
        acc = _mm512_fmadd_pd(v, v, acc);
    }
    if (i < n) {
        __m512d v = _mm512_maskz_loadu_pd(tail_mask(n - i), x + i);
        acc = _mm512_fmadd_pd(v, v, acc);
    }
    return _mm512_reduce_add_pd(acc);
}

void w_axpy(double a, const double* x, double* y, int n) {
    const __m512d va = _mm512_set1_pd(a);
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_fmadd_pd(va, _mm512_loadu_pd(x + i), _mm512_loadu_pd(y + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, m,
                              _mm512_fmadd_pd(va, _mm512_maskz_loadu_pd(m, x + i),
                                              _mm512_maskz_loadu_pd(m, y + i)));
    }
}

void w_scale(double a, double* x, int n) {
    const __m512d va = _mm512_set1_pd(a);
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(x + i, _mm512_mul_pd(va, _mm512_loadu_pd(x + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(x + i, m, _mm512_mul_pd(va, _mm512_maskz_loadu_pd(m, x + i)));
    }
}

void w_acc(double* y, const double* x, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_add_pd(_mm512_loadu_pd(y + i), _mm512_loadu_pd(x + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, m,
                              _mm512_add_pd(_mm512_maskz_loadu_pd(m, y + i),
                                            _mm512_maskz_loadu_pd(m, x + i)));
    }
}

void w_mul(double* y, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, m,
                              _mm512_mul_pd(_mm512_maskz_loadu_pd(m, a + i),
                                            _mm512_maskz_loadu_pd(m, b + i)));
    }
}

void w_mulacc(double* y, const double* a, const double* b, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i),
                                                _mm512_loadu_pd(y + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, m,
                              _mm512_fmadd_pd(_mm512_maskz_loadu_pd(m, a + i),
                                              _mm512_maskz_loadu_pd(m, b + i),
                                              _mm512_maskz_loadu_pd(m, y + i)));
    }
}

void w_muladd(double* y, const double* a, const double* b, const double* c, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8)
        _mm512_storeu_pd(y + i, _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i),
                                                _mm512_loadu_pd(c + i)));
    if (i < n) {
        const __mmask8 m = tail_mask(n - i);
        _mm512_mask_storeu_pd(y + i, m,
                              _mm512_fmadd_pd(_mm512_maskz_loadu_pd(m, a + i),
                                              _mm512_maskz_loadu_pd(m, b + i),
                                              _mm512_maskz_loadu_pd(m, c + i)));
    }
}

void w_fma3(double* x, const double* d, const double* cu, const double* u,
            const double* cn, const double* xi, int n) {
    int i = 0;
    for (; i + 8 <= n; i += 8) {
        __m512d acc = _mm512_mul_pd(_mm512_loadu_pd(d + i), _mm512_loadu_pd(x + i));
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(cu + i), _mm512_loadu_pd(u + i), acc);
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(cn + i), _mm512_loadu_pd(xi + i), acc);
        _mm512_storeu_pd(x + i, acc);
    }
    for (; i < n; ++i) x[i] = d[i] * x[i] + cu[i] * u[i] + cn[i] * xi[i];
}

void w_matmul_nn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        double* ci = C + static_cast<long>(i) * N;
        const double* ai = A + static_cast<long>(i) * K;
        for (int k = 0; k < K; ++k) {
            const __m512d a = _mm512_set1_pd(ai[k]);
            const double* bk = B + static_cast<long>(k) * N;
            int j = 0;
            for (; j + 8 <= N; j += 8)
                _mm512_storeu_pd(ci + j, _mm512_fmadd_pd(a, _mm512_loadu_pd(bk + j),
                                                         _mm512_loadu_pd(ci + j)));
            if (j < N) {
                const __mmask8 m = tail_mask(N - j);
                _mm512_mask_storeu_pd(ci + j, m,
                                      _mm512_fmadd_pd(a, _mm512_maskz_loadu_pd(m, bk + j),
                                                      _mm512_maskz_loadu_pd(m, ci + j)));
            }
        }
    }
}

void w_matmul_nt(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int i = 0; i < M; ++i) {
        const double* ai = A + static_cast<long>(i) * K;
        double* ci = C + static_cast<long>(i) * N;
        for (int j = 0; j < N; ++j) ci[j] += w_dot(ai, B + static_cast<long>(j) * K, K);
    }
}

void w_matmul_tn(double* C, const double* A, const double* B, int M, int K, int N) {
    for (int m = 0; m < M; ++m) {
        const double* am = A + static_cast<long>(m) * K;
        const double* bm = B + static_cast<long>(m) * N;
        for (int k = 0; k < K; ++k) {
            const __m512d a = _mm512_set1_pd(am[k]);
            double* ck = C + static_cast<long>(k) * N;
            int j = 0;
            for (; j + 8 <= N; j += 8)
                _mm512_storeu_pd(ck + j, _mm512_fmadd_pd(a, _mm512_loadu_pd(bm + j),
                                                         _mm512_loadu_pd(ck + j)));
            if (j < N) {
                const __mmask8 m2 = tail_mask(N - j);
                _mm512_mask_storeu_pd(ck + j, m2,
                                      _mm512_fmadd_pd(a, _mm512_maskz_loadu_pd(m2, bm + j),
                                                      _mm512_maskz_loadu_pd(m2, ck + j)));
            }
        }
    }
}

}  // namespace

const Impl avx512_impl = {
    "avx512", w_dot,    w_sumsq,     w_axpy,      w_scale,     w_acc, w_mul,
    w_mulacc, w_muladd, w_fma3,      w_matmul_nn, w_matmul_nt, w_matmul_tn,
};

}  // namespace fsb::kern::detail

#endif  // __x86_64__
