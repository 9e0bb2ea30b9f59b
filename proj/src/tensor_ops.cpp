#include "probmotion/tensor_ops.hpp"

#include <cmath>

#include "probmotion/error.hpp"
#include "probmotion/kernels.hpp"

namespace probmotion::tops {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        raise(Errc::shape, std::string(op) + ": shapes " + a.shape_str() + " and " +
                               b.shape_str() + " differ");
}

template <typename F>
Tensor map(const Tensor& a, F f) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.rows(), a.cols());
    kernels::ops().add(a.data(), b.data(), out.data(), a.size());
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.rows(), a.cols());
    kernels::ops().sub(a.data(), b.data(), out.data(), a.size());
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.rows(), a.cols());
    kernels::ops().mul(a.data(), b.data(), out.data(), a.size());
    return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "div");
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / b[i];
    return out;
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, double c) {
    Tensor out(a.rows(), a.cols());
    kernels::ops().scale(a.data(), c, out.data(), a.size());
    return out;
}

Tensor add_scalar(const Tensor& a, double c) {
    return map(a, [c](double x) { return x + c; });
}

Tensor max_scalar(const Tensor& a, double c) {
    return map(a, [c](double x) { return x > c ? x : c; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows())
        raise(Errc::shape, "matmul: inner dimensions " + a.shape_str() + " * " +
                               b.shape_str() + " do not match");
    Tensor out(a.rows(), b.cols());
    kernels::ops().matmul_nn(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.cols());
    return out;
}

Tensor tanh(const Tensor& a) {
    return map(a, [](double x) { return std::tanh(x); });
}

Tensor sigmoid(const Tensor& a) {
    return map(a, [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    });
}

Tensor exp(const Tensor& a) {
    return map(a, [](double x) { return std::exp(x); });
}

Tensor log(const Tensor& a) {
    return map(a, [](double x) { return std::log(x); });
}

Tensor abs(const Tensor& a) {
    return map(a, [](double x) { return std::fabs(x); });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows())
        raise(Errc::shape, "concat_cols: row counts " + a.shape_str() + " and " +
                               b.shape_str() + " differ");
    Tensor out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
    }
    return out;
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols())
        raise(Errc::shape, "slice_cols: range [" + std::to_string(begin) + ", " +
                               std::to_string(end) + ") invalid for " + a.shape_str());
    Tensor out(a.rows(), end - begin);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = begin; c < end; ++c) out.at(r, c - begin) = a.at(r, c);
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<std::size_t>& idx) {
    Tensor out(idx.size(), a.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= a.rows())
            raise(Errc::shape, "gather_rows: index " + std::to_string(idx[r]) +
                                   " out of range for " + a.shape_str());
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(idx[r], c);
    }
    return out;
}

Tensor row_update_add(const Tensor& base, const std::vector<std::size_t>& idx,
                      const Tensor& delta) {
    if (delta.rows() != idx.size() || delta.cols() != base.cols())
        raise(Errc::shape, "row_update_add: delta " + delta.shape_str() + " does not fit " +
                               std::to_string(idx.size()) + " rows of " + base.shape_str());
    Tensor out = base;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= base.rows())
            raise(Errc::shape, "row_update_add: index " + std::to_string(idx[r]) +
                                   " out of range for " + base.shape_str());
        for (std::size_t c = 0; c < base.cols(); ++c)
            out.at(idx[r], c) = out.at(idx[r], c) + delta.at(r, c);
    }
    return out;
}

Tensor gather_cols(const Tensor& a, const std::vector<std::size_t>& idx) {
    Tensor out(a.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) {
        if (idx[c] >= a.cols())
            raise(Errc::shape, "gather_cols: index " + std::to_string(idx[c]) +
                                   " out of range for " + a.shape_str());
        for (std::size_t r = 0; r < a.rows(); ++r) out.at(r, c) = a.at(r, idx[c]);
    }
    return out;
}

Tensor assemble_cols(std::size_t cols, const std::vector<std::vector<std::size_t>>& idx,
                     const std::vector<Tensor>& parts) {
    if (idx.size() != parts.size())
        raise(Errc::shape, "assemble_cols: " + std::to_string(idx.size()) +
                               " index lists for " + std::to_string(parts.size()) + " parts");
    if (parts.empty()) raise(Errc::shape, "assemble_cols: no parts");
    const std::size_t rows = parts[0].rows();
    Tensor out(rows, cols);
    std::vector<bool> seen(cols, false);
    for (std::size_t p = 0; p < parts.size(); ++p) {
        if (parts[p].rows() != rows || parts[p].cols() != idx[p].size())
            raise(Errc::shape, "assemble_cols: part " + std::to_string(p) + " is " +
                                   parts[p].shape_str() + ", expected " +
                                   std::to_string(rows) + "x" + std::to_string(idx[p].size()));
        for (std::size_t c = 0; c < idx[p].size(); ++c) {
            const std::size_t dst = idx[p][c];
            if (dst >= cols || seen[dst])
                raise(Errc::shape, "assemble_cols: column " + std::to_string(dst) +
                                       " out of range or assigned twice");
            seen[dst] = true;
            for (std::size_t r = 0; r < rows; ++r) out.at(r, dst) = parts[p].at(r, c);
        }
    }
    for (std::size_t c = 0; c < cols; ++c)
        if (!seen[c])
            raise(Errc::shape, "assemble_cols: column " + std::to_string(c) + " unassigned");
    return out;
}

Tensor reduce_sum(const Tensor& a) {
    Tensor out(1, 1);
    out[0] = kernels::ops().sum(a.data(), a.size());
    return out;
}

Tensor reduce_mean(const Tensor& a) {
    if (a.size() == 0) raise(Errc::shape, "reduce_mean of an empty tensor");
    Tensor out(1, 1);
    out[0] = kernels::ops().sum(a.data(), a.size()) / static_cast<double>(a.size());
    return out;
}

}  // namespace probmotion::tops
