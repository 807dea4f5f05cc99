#include "skiprun/tensor.hpp"

#include <cstring>
#include <functional>
#include <numeric>

#include "skiprun/error.hpp"

namespace skiprun {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

void check_dims(const std::vector<std::size_t>& dims) {
    for (std::size_t d : dims) {
        if (d == 0) throw ShapeError("tensor dims must be positive, got " + skiprun::shape_string(dims));
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims, float fill) : dims_(std::move(dims)) {
    check_dims(dims_);
    data_.assign(product(dims_), fill);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    check_dims(dims_);
    if (data_.size() != product(dims_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match dims " + skiprun::shape_string(dims_));
    }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<float> values) {
    return Tensor({rows, cols}, std::vector<float>(values));
}

Tensor Tensor::vector(std::initializer_list<float> values) {
    return Tensor({values.size()}, std::vector<float>(values));
}

std::span<float> Tensor::row(std::size_t r) {
    const std::size_t c = cols();
    return std::span<float>(data_).subspan(r * c, c);
}

std::span<const float> Tensor::row(std::size_t r) const {
    const std::size_t c = cols();
    return std::span<const float>(data_).subspan(r * c, c);
}

std::string Tensor::shape_string() const { return skiprun::shape_string(dims_); }

bool Tensor::bitwise_equal(const Tensor& other) const {
    return dims_ == other.dims_ && data_.size() == other.data_.size() &&
           (data_.empty() ||
            std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0);
}

std::string shape_string(std::span<const std::size_t> dims) {
    std::string out = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(dims[i]);
    }
    return out + "]";
}

const char* to_string(CheckpointFault fault) {
    switch (fault) {
        case CheckpointFault::BadMagic: return "bad magic";
        case CheckpointFault::VersionMismatch: return "version mismatch";
        case CheckpointFault::Truncated: return "truncated";
        case CheckpointFault::Structure: return "structural error";
    }
    return "checkpoint error";
}

}  // namespace skiprun
