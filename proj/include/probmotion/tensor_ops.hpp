#pragma once

#include <cstddef>
#include <vector>

#include "probmotion/tensor.hpp"

// Eager tensor operations. These helpers are the single forward
// implementation: the autodiff graph calls the same functions when it builds
// nodes, so eager inference and taped training produce bit-identical values.
// Elementwise arithmetic and matrix products route through the active kernel
// lane; transcendental maps apply libm element by element.

namespace probmotion::tops {

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor neg(const Tensor& a);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor max_scalar(const Tensor& a, double c);  // elementwise max(a, c)

// C[M x N] = A[M x K] * B[K x N]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);  // numerically stable split form
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor abs(const Tensor& a);

Tensor concat_cols(const Tensor& a, const Tensor& b);  // same row count
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);

// Rows of `a` selected by index (duplicates allowed).
Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx);
// Copy of `base` with `delta` row i added onto base row idx[i]; indices must
// be unique.
Tensor row_update_add(const Tensor& base, const std::vector<std::size_t>& idx,
                      const Tensor& delta);

Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& idx);
// Inverse of per-part column gathers: parts[i] supplies columns idx[i] of the
// result; the index lists must partition [0, cols).
Tensor assemble_cols(std::size_t cols, const std::vector<std::vector<std::size_t>>& idx,
                     const std::vector<Tensor>& parts);

Tensor reduce_sum(const Tensor& a);   // 1x1
Tensor reduce_mean(const Tensor& a);  // 1x1

}  // namespace probmotion::tops
