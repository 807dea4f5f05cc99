#include "skiprun/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "skiprun/error.hpp"

namespace skiprun {

namespace {

using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

void matmul_into(std::span<const float> a, std::span<const float> b, std::span<float> out,
                 std::size_t m, std::size_t k, std::size_t n) {
    if (a.size() != m * k || b.size() != k * n || out.size() != m * n) {
        throw ShapeError("matmul_into: buffer sizes do not match " + std::to_string(m) + "x" +
                         std::to_string(k) + " * " + std::to_string(k) + "x" + std::to_string(n));
    }
    const auto em = static_cast<Eigen::Index>(m);
    const auto ek = static_cast<Eigen::Index>(k);
    const auto en = static_cast<Eigen::Index>(n);
    Eigen::Map<const RowMajor> ma(a.data(), em, ek);
    Eigen::Map<const RowMajor> mb(b.data(), ek, en);
    Eigen::Map<RowMajor> mc(out.data(), em, en);
    mc.noalias() = ma * mb;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.ndims() != 2 || b.ndims() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: incompatible shapes " + a.shape_string() + " and " +
                         b.shape_string());
    }
    Tensor c({a.dim(0), b.dim(1)});
    matmul_into(a.data(), b.data(), c.data(), a.dim(0), a.dim(1), b.dim(1));
    return c;
}

void softmax_inplace(std::span<float> x) {
    if (x.empty()) throw DomainError("softmax of an empty vector");
    const float max = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (float& v : x) {
        v = std::exp(v - max);
        sum += v;
    }
    const double inv = 1.0 / sum;
    for (float& v : x) v = static_cast<float>(v * inv);
}

std::vector<float> softmax(std::span<const float> x) {
    std::vector<float> out(x.begin(), x.end());
    softmax_inplace(out);
    return out;
}

void rms_norm_into(std::span<const float> x, std::span<const float> weight, float eps,
                   std::span<float> out) {
    if (x.empty()) throw ShapeError("rms_norm of an empty vector");
    if (x.size() != weight.size() || out.size() != x.size()) {
        throw ShapeError("rms_norm: x has length " + std::to_string(x.size()) +
                         " but weight has length " + std::to_string(weight.size()));
    }
    double sum_sq = 0.0;
    for (float v : x) sum_sq += static_cast<double>(v) * v;
    const double denom = std::sqrt(sum_sq / static_cast<double>(x.size()) + eps);
    // zero input with eps = 0 stays zero
    const float inv = denom > 0.0 ? static_cast<float>(1.0 / denom) : 0.0f;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = weight[i] * (x[i] * inv);
}

std::vector<float> rms_norm(std::span<const float> x, std::span<const float> weight, float eps) {
    std::vector<float> out(x.size());
    rms_norm_into(x, weight, eps, out);
    return out;
}

void rope_apply_inplace(std::span<float> x, std::size_t position, double theta_base) {
    const std::size_t d = x.size();
    if (d % 2 != 0) throw ConfigError("rope needs an even head dimension, got " + std::to_string(d));
    if (position == 0) return;
    for (std::size_t i = 0; i < d / 2; ++i) {
        const double freq = std::pow(theta_base, -2.0 * static_cast<double>(i) / static_cast<double>(d));
        const double angle = static_cast<double>(position) * freq;
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double x0 = x[2 * i];
        const double x1 = x[2 * i + 1];
        x[2 * i] = static_cast<float>(x0 * c - x1 * s);
        x[2 * i + 1] = static_cast<float>(x0 * s + x1 * c);
    }
}

std::vector<float> rope_apply(std::span<const float> x, std::size_t position, double theta_base) {
    std::vector<float> out(x.begin(), x.end());
    rope_apply_inplace(out, position, theta_base);
    return out;
}

float silu(float x) { return x / (1.0f + std::exp(-x)); }

std::vector<float> silu(std::span<const float> x) {
    std::vector<float> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [](float v) { return silu(v); });
    return out;
}

double log_sum_exp(std::span<const float> x) {
    if (x.empty()) throw DomainError("log_sum_exp of an empty vector");
    const double max = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (float v : x) sum += std::exp(static_cast<double>(v) - max);
    return max + std::log(sum);
}

}  // namespace skiprun
