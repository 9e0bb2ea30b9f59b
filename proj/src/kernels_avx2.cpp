#include "probmotion/kernels.hpp"

// AVX2 lane. Mirrors the scalar reference order exactly: plain mul+add (no
// FMA), stripe accumulators for reductions, ascending-k matmul updates.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace probmotion::kernels::detail {
namespace {

inline double combine4(const double s[4]) { return (s[0] + s[1]) + (s[2] + s[3]); }

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_avx2(const double* a, double c, double* out, std::size_t n) {
    const __m256d cv = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(cv, _mm256_loadu_pd(a + i)));
    for (; i < n; ++i) out[i] = c * a[i];
}

void axpy_avx2(double c, const double* a, double* out, std::size_t n) {
    const __m256d cv = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_mul_pd(cv, _mm256_loadu_pd(a + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), v));
    }
    for (; i < n; ++i) out[i] = out[i] + c * a[i];
}

void accum_avx2(const double* a, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), _mm256_loadu_pd(a + i)));
    for (; i < n; ++i) out[i] = out[i] + a[i];
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s[4];
    _mm256_storeu_pd(s, acc);
    for (; i < n; ++i) s[i & 3] = s[i & 3] + a[i];
    return combine4(s);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    double s[4];
    _mm256_storeu_pd(s, acc);
    for (; i < n; ++i) s[i & 3] = s[i & 3] + a[i] * b[i];
    return combine4(s);
}

void matmul_nn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) _mm256_storeu_pd(crow + j, _mm256_setzero_pd());
        for (; j < n; ++j) crow[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const __m256d avv = _mm256_set1_pd(av);
            const double* brow = b + p * n;
            j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d v = _mm256_mul_pd(avv, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), v));
            }
            for (; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

void matmul_nt_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            c[i * n + j] = dot_avx2(a + i * k, b + j * k, k);
}

void matmul_tn_avx2(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    std::size_t q = 0;
    for (; q + 4 <= m * n; q += 4) _mm256_storeu_pd(c + q, _mm256_setzero_pd());
    for (; q < m * n; ++q) c[q] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a[p * m + i];
            const __m256d avv = _mm256_set1_pd(av);
            double* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 4 <= n; j += 4) {
                __m256d v = _mm256_mul_pd(avv, _mm256_loadu_pd(brow + j));
                _mm256_storeu_pd(crow + j, _mm256_add_pd(_mm256_loadu_pd(crow + j), v));
            }
            for (; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

}  // namespace

const Ops& avx2_table() {
    static const Ops t{add_avx2,   sub_avx2,       mul_avx2,       scale_avx2,
                       axpy_avx2,  accum_avx2,     sum_avx2,       dot_avx2,
                       matmul_nn_avx2, matmul_nt_avx2, matmul_tn_avx2};
    return t;
}

}  // namespace probmotion::kernels::detail

#endif  // x86_64
