#pragma once

// Dense double-precision kernels behind the library's arithmetic inner loops
// (mode-wise SDE updates, network layers, spectral projections, MMD Grams).
//
// Every kernel has a scalar reference implementation plus AVX2/AVX-512
// variants compiled in their own translation units. The active variant is
// selected once at runtime from CPU features; the FSB_SIMD environment
// variable (scalar | avx2 | avx512 | auto) overrides the selection.
// Variants are equivalence-tested against the scalar reference.
//
// All matrices are row-major. Output buffers never alias inputs.

#include <string>

namespace fsb::kern {

struct Impl {
    const char* name;

    // reductions
    double (*dot)(const double* x, const double* y, int n);
    double (*sumsq)(const double* x, int n);

    // elementwise, vectors of length n
    void (*axpy)(double a, const double* x, double* y, int n);   // y += a*x
    void (*scale)(double a, double* x, int n);                   // x *= a
    void (*acc)(double* y, const double* x, int n);              // y += x
    void (*mul)(double* y, const double* a, const double* b, int n);     // y = a.*b
    void (*mulacc)(double* y, const double* a, const double* b, int n);  // y += a.*b
    void (*muladd)(double* y, const double* a, const double* b,
                   const double* c, int n);                      // y = a.*b + c
    // x = d.*x + cu.*u + cn.*xi   (one SDE step over all modes)
    void (*fma3)(double* x, const double* d, const double* cu, const double* u,
                 const double* cn, const double* xi, int n);

    // matrix products, accumulating into C
    // C(MxN) += A(MxK) * B(KxN)
    void (*matmul_nn)(double* C, const double* A, const double* B,
                      int M, int K, int N);
    // C(MxN) += A(MxK) * B(NxK)^T
    void (*matmul_nt)(double* C, const double* A, const double* B,
                      int M, int K, int N);
    // C(KxN) += A(MxK)^T * B(MxN)
    void (*matmul_tn)(double* C, const double* A, const double* B,
                      int M, int K, int N);
};

// Active implementation (resolved on first call, stable afterwards).
const Impl& active();

// Named lookup for equivalence tests: "scalar", "avx2", "avx512".
// Returns nullptr when the variant is not compiled in or the CPU lacks it.
const Impl* impl_by_name(const std::string& name);

namespace detail {
extern const Impl scalar_impl;
#if defined(__x86_64__)
extern const Impl avx2_impl;
extern const Impl avx512_impl;
#endif
}  // namespace detail

}  // namespace fsb::kern
