#include "probmotion/tensor.hpp"

#include <cmath>

#include "probmotion/error.hpp"

namespace probmotion {

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        raise(Errc::shape, "tensor data size " + std::to_string(data_.size()) +
                               " does not match " + std::to_string(rows_) + "x" +
                               std::to_string(cols_));
}

Tensor Tensor::row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(1, n, std::move(v));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
    Tensor t(rows, cols);
    for (auto& x : t.data_) x = value;
    return t;
}

std::string Tensor::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Tensor Tensor::reshaped(std::size_t rows, std::size_t cols) const {
    if (rows * cols != size())
        raise(Errc::shape, "cannot reshape " + shape_str() + " to " + std::to_string(rows) +
                               "x" + std::to_string(cols));
    return Tensor(rows, cols, data_);
}

bool all_finite(const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!std::isfinite(t[i])) return false;
    return true;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        // Compare as doubles but treat +0/-0 and NaN patterns strictly.
        if (a[i] != b[i]) return false;
        if (std::signbit(a[i]) != std::signbit(b[i])) return false;
    }
    return true;
}

}  // namespace probmotion
