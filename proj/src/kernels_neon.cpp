#include "probmotion/kernels.hpp"

// NEON lane (aarch64). Two float64x2 accumulators stand in for the four
// reduction stripes: lo holds stripes {0,1}, hi holds {2,3}. Plain mul+add
// throughout so results match the scalar reference bit for bit.

#if defined(__aarch64__)

#include <arm_neon.h>

namespace probmotion::kernels::detail {
namespace {

inline double combine4(const double s[4]) { return (s[0] + s[1]) + (s[2] + s[3]); }

void add_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_neon(const double* a, double c, double* out, std::size_t n) {
    const float64x2_t cv = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(cv, vld1q_f64(a + i)));
    for (; i < n; ++i) out[i] = c * a[i];
}

void axpy_neon(double c, const double* a, double* out, std::size_t n) {
    const float64x2_t cv = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vmulq_f64(cv, vld1q_f64(a + i));
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), v));
    }
    for (; i < n; ++i) out[i] = out[i] + c * a[i];
}

void accum_neon(const double* a, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), vld1q_f64(a + i)));
    for (; i < n; ++i) out[i] = out[i] + a[i];
}

double sum_neon(const double* a, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0);  // stripes 0,1
    float64x2_t hi = vdupq_n_f64(0.0);  // stripes 2,3
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lo = vaddq_f64(lo, vld1q_f64(a + i));
        hi = vaddq_f64(hi, vld1q_f64(a + i + 2));
    }
    double s[4];
    vst1q_f64(s, lo);
    vst1q_f64(s + 2, hi);
    for (; i < n; ++i) s[i & 3] = s[i & 3] + a[i];
    return combine4(s);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0);
    float64x2_t hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double s[4];
    vst1q_f64(s, lo);
    vst1q_f64(s + 2, hi);
    for (; i < n; ++i) s[i & 3] = s[i & 3] + a[i] * b[i];
    return combine4(s);
}

void matmul_nn_neon(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[i * k + p];
            const float64x2_t avv = vdupq_n_f64(av);
            const double* brow = b + p * n;
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                float64x2_t v = vmulq_f64(avv, vld1q_f64(brow + j));
                vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), v));
            }
            for (; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

void matmul_nt_neon(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            c[i * n + j] = dot_neon(a + i * k, b + j * k, k);
}

void matmul_tn_neon(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t q = 0; q < m * n; ++q) c[q] = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = a[p * m + i];
            const float64x2_t avv = vdupq_n_f64(av);
            double* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                float64x2_t v = vmulq_f64(avv, vld1q_f64(brow + j));
                vst1q_f64(crow + j, vaddq_f64(vld1q_f64(crow + j), v));
            }
            for (; j < n; ++j) crow[j] = crow[j] + av * brow[j];
        }
    }
}

}  // namespace

const Ops& neon_table() {
    static const Ops t{add_neon,   sub_neon,       mul_neon,       scale_neon,
                       axpy_neon,  accum_neon,     sum_neon,       dot_neon,
                       matmul_nn_neon, matmul_nt_neon, matmul_tn_neon};
    return t;
}

}  // namespace probmotion::kernels::detail

#endif  // aarch64
