#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Row-major 2-D double tensor. Everything in the model is small and dense
// (poses, hidden states, weight matrices), so one concrete shape class keeps
// the arithmetic layer simple; 1-D data travels as a single row.

namespace probmotion {

class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols);  // zero-filled
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Tensor row(std::vector<double> v);
    static Tensor full(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    bool same_shape(const Tensor& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_str() const;

    Tensor reshaped(std::size_t rows, std::size_t cols) const;  // size must match

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

bool all_finite(const Tensor& t);

// Exact element-for-element equality (bitwise on values).
bool bit_equal(const Tensor& a, const Tensor& b);

}  // namespace probmotion
