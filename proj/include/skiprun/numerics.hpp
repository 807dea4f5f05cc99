#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skiprun/tensor.hpp"

namespace skiprun {

// c = a · b for a [m×k], b [k×n]. Throws ShapeError naming both shapes on
// inner-dimension mismatch.
Tensor matmul(const Tensor& a, const Tensor& b);

// out [m×n] = a [m×k] · b [k×n] over raw row-major views; out must be sized.
void matmul_into(std::span<const float> a, std::span<const float> b, std::span<float> out,
                 std::size_t m, std::size_t k, std::size_t n);

// In-place softmax over a single row, max-subtracted. Empty → DomainError.
void softmax_inplace(std::span<float> x);
std::vector<float> softmax(std::span<const float> x);

// out[i] = weight[i] * x[i] / sqrt(mean(x^2) + eps)
void rms_norm_into(std::span<const float> x, std::span<const float> weight, float eps,
                   std::span<float> out);
std::vector<float> rms_norm(std::span<const float> x, std::span<const float> weight, float eps);

// Rotates consecutive pairs (x[2i], x[2i+1]) by position * theta_base^(-2i/d).
// Interleaved layout; odd length → ConfigError.
void rope_apply_inplace(std::span<float> x, std::size_t position, double theta_base);
std::vector<float> rope_apply(std::span<const float> x, std::size_t position, double theta_base);

float silu(float x);
std::vector<float> silu(std::span<const float> x);

// log(sum(exp(x))) computed in double with max-subtraction.
double log_sum_exp(std::span<const float> x);

}  // namespace skiprun
