#pragma once

#include <cstddef>

// Dense double-precision kernels behind runtime dispatch.
//
// Every lane (scalar reference, AVX2, NEON) implements the same fixed
// evaluation order, so all lanes produce bit-identical results:
//   - elementwise ops round each element independently (no FMA anywhere),
//   - sum/dot accumulate into four stripes s[i % 4] and combine as
//     (s0 + s1) + (s2 + s3),
//   - matmul_nn / matmul_tn accumulate each output element in ascending-k
//     order, matmul_nt is a striped dot per output element.
// The scalar lane is the reference; SIMD lanes are equivalence-tested
// against it for exact equality.

namespace probmotion::kernels {

enum class Lane { scalar, avx2, neon };

struct Ops {
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(const double* a, double c, double* out, std::size_t n);  // out = c*a
    void (*axpy)(double c, const double* a, double* out, std::size_t n);   // out += c*a
    void (*accum)(const double* a, double* out, std::size_t n);            // out += a
    double (*sum)(const double* a, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // C[M x N] = A[M x K] * B[K x N]
    void (*matmul_nn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
    // C[M x N] = A[M x K] * B^T, with B stored [N x K]
    void (*matmul_nt)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
    // C[M x N] = A^T * B, with A stored [K x M], B stored [K x N]
    void (*matmul_tn)(const double* a, const double* b, double* c,
                      std::size_t m, std::size_t k, std::size_t n);
};

// Active kernel table. Lane is chosen once: PROBMOTION_KERNELS=scalar|avx2|neon
// overrides auto-detection (unknown or unavailable values fall back to auto
// with a warning on stderr).
const Ops& ops();
Lane active_lane();

const char* lane_name(Lane lane);
bool lane_available(Lane lane);
const Ops& table(Lane lane);  // throws Error(config) if unavailable

// Test hooks.
void force_lane(Lane lane);  // throws Error(config) if unavailable
void reset_lane();

namespace detail {
const Ops& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_table();
#endif
#if defined(__aarch64__)
const Ops& neon_table();
#endif
}  // namespace detail

}  // namespace probmotion::kernels
