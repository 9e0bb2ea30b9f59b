#include "probmotion/kernels.hpp"

// Reference lane. The loop structure here *defines* the numeric semantics of
// every kernel; SIMD lanes must reproduce it bit-for-bit.

namespace probmotion::kernels::detail {
namespace {

void add_ref(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_ref(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_ref(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_ref(const double* a, double c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c * a[i];
}

void axpy_ref(double c, const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + c * a[i];
}

void accum_ref(const double* a, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = out[i] + a[i];
}

double sum_ref(const double* a, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) s[i & 3] = s[i & 3] + a[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

double dot_ref(const double* a, const double* b, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) s[i & 3] = s[i & 3] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

void matmul_nn_ref(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

void matmul_nt_ref(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            c[i * n + j] = dot_ref(a + i * k, b + j * k, k);
}

void matmul_tn_ref(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a[p * m + i];
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

}  // namespace

const Ops& scalar_table() {
    static const Ops t{add_ref,   sub_ref,       mul_ref,       scale_ref,
                       axpy_ref,  accum_ref,     sum_ref,       dot_ref,
                       matmul_nn_ref, matmul_nt_ref, matmul_tn_ref};
    return t;
}

}  // namespace probmotion::kernels::detail
