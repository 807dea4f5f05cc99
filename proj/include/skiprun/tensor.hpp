#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace skiprun {

using TokenId = std::int32_t;

// Dense row-major float32 tensor. Owns its storage; copies are deep.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims, float fill = 0.0f);
    Tensor(std::vector<std::size_t> dims, std::vector<float> data);

    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<float> values);
    static Tensor vector(std::initializer_list<float> values);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t ndims() const { return dims_.size(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t size() const { return data_.size(); }

    // Treats the tensor as a matrix over its leading dim.
    std::size_t rows() const { return dims_.empty() ? 0 : dims_.front(); }
    std::size_t cols() const { return rows() == 0 ? 0 : data_.size() / rows(); }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }
    std::span<float> row(std::size_t r);
    std::span<const float> row(std::size_t r) const;

    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }
    float& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    float at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::string shape_string() const;

    // Bitwise equality of dims and payload (distinguishes -0.0 from 0.0).
    bool bitwise_equal(const Tensor& other) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<float> data_;
};

std::string shape_string(std::span<const std::size_t> dims);

}  // namespace skiprun
