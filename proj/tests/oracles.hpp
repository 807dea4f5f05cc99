#pragma once

// Test-only reference computations, written independently of the library's
// implementation paths.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "skiprun/config.hpp"
#include "skiprun/tensor.hpp"

namespace skiprun::testing {

inline std::vector<double> naive_matmul(const std::vector<double>& a, const std::vector<double>& b,
                                        std::size_t m, std::size_t k, std::size_t n) {
    std::vector<double> c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t t = 0; t < k; ++t) c[i * n + j] += a[i * k + t] * b[t * n + j];
    return c;
}

inline double naive_cosine(const std::vector<double>& u, const std::vector<double>& v) {
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return dot / std::sqrt(nu * nv);
}

// log p(target) from a logits row, by direct exponent summation.
inline double naive_logprob(const std::vector<double>& logits, std::size_t target) {
    double z = 0;
    for (double l : logits) z += std::exp(l);
    return logits[target] - std::log(z);
}

inline Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937& rng, float lo = -1.0f,
                            float hi = 1.0f) {
    Tensor t(std::move(dims));
    std::uniform_real_distribution<float> dist(lo, hi);
    for (float& v : t.data()) v = dist(rng);
    return t;
}

inline std::vector<TokenId> random_tokens(std::size_t n, std::size_t vocab, std::mt19937& rng) {
    std::uniform_int_distribution<TokenId> dist(0, static_cast<TokenId>(vocab - 1));
    std::vector<TokenId> out(n);
    for (auto& t : out) t = dist(rng);
    return out;
}

inline ModelConfig toy_config(std::size_t n_layers = 4) {
    ModelConfig c;
    c.n_layers = n_layers;
    c.d_model = 16;
    c.n_heads = 4;
    c.n_kv_heads = 2;
    c.d_ff = 24;
    c.vocab_size = 32;
    c.max_seq_len = 64;
    c.rope_theta_base = 10000.0;
    c.norm_eps = 1e-5f;
    return c;
}

// Random valid config with L in [min_layers, max_layers].
inline ModelConfig random_config(std::mt19937& rng, std::size_t min_layers = 2,
                                 std::size_t max_layers = 8) {
    const std::size_t kv_options[] = {1, 2, 4};
    ModelConfig c;
    c.n_layers = std::uniform_int_distribution<std::size_t>(min_layers, max_layers)(rng);
    c.n_kv_heads = kv_options[rng() % 3];
    c.n_heads = c.n_kv_heads * (1 + rng() % 2);
    c.d_model = c.n_heads * 2 * (1 + rng() % 4);
    c.d_ff = 8 + rng() % 24;
    c.vocab_size = 8 + rng() % 40;
    c.max_seq_len = 32;
    c.rope_theta_base = 10000.0;
    c.norm_eps = 1e-5f;
    return c;
}

}  // namespace skiprun::testing

#include "skiprun/weights.hpp"

namespace skiprun::testing {

// Double-precision reference decoder, no cache, explicit loops. Skip flags
// are zero-based per layer.
inline std::vector<std::vector<double>> reference_logits(const ModelWeights& w,
                                                         const std::vector<TokenId>& tokens,
                                                         const std::vector<bool>& skip_attn,
                                                         const std::vector<bool>& skip_mlp) {
    const auto& c = w.config;
    const std::size_t n = tokens.size(), d = c.d_model, hd = c.head_dim(), kvd = c.kv_dim();
    const std::size_t group = c.n_heads / c.n_kv_heads;
    using Mat = std::vector<std::vector<double>>;
    auto at = [](const Tensor& t, std::size_t r, std::size_t col) {
        return static_cast<double>(t.data()[r * t.dims()[1] + col]);
    };
    auto norm = [&](const std::vector<double>& x, const Tensor& g) {
        double ss = 0;
        for (double v : x) ss += v * v;
        const double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.size()) + c.norm_eps);
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv * g.data()[i];
        return out;
    };
    auto proj = [&](const std::vector<double>& x, const Tensor& W) {
        std::vector<double> out(W.dims()[1], 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[i] * at(W, i, j);
        return out;
    };
    auto rope = [&](std::vector<double>& v, std::size_t off, std::size_t pos) {
        for (std::size_t i = 0; i < hd / 2; ++i) {
            const double ang = static_cast<double>(pos) *
                               std::pow(c.rope_theta_base, -2.0 * static_cast<double>(i) / static_cast<double>(hd));
            const double a = v[off + 2 * i], b = v[off + 2 * i + 1];
            v[off + 2 * i] = a * std::cos(ang) - b * std::sin(ang);
            v[off + 2 * i + 1] = a * std::sin(ang) + b * std::cos(ang);
        }
    };

    Mat x(n, std::vector<double>(d));
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t i = 0; i < d; ++i) x[t][i] = at(w.embed, static_cast<std::size_t>(tokens[t]), i);

    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const auto& L = w.layers[l];
        if (!skip_attn[l]) {
            Mat q(n), k(n), v(n);
            for (std::size_t t = 0; t < n; ++t) {
                const auto h = norm(x[t], L.attn.norm);
                q[t] = proj(h, L.attn.wq);
                k[t] = proj(h, L.attn.wk);
                v[t] = proj(h, L.attn.wv);
                for (std::size_t hh = 0; hh < c.n_heads; ++hh) rope(q[t], hh * hd, t);
                for (std::size_t hh = 0; hh < c.n_kv_heads; ++hh) rope(k[t], hh * hd, t);
            }
            for (std::size_t t = 0; t < n; ++t) {
                std::vector<double> mixed(d, 0.0);
                for (std::size_t hh = 0; hh < c.n_heads; ++hh) {
                    const std::size_t kvo = (hh / group) * hd;
                    std::vector<double> s(t + 1);
                    double mx = -1e300;
                    for (std::size_t u = 0; u <= t; ++u) {
                        double dot = 0;
                        for (std::size_t i = 0; i < hd; ++i) dot += q[t][hh * hd + i] * k[u][kvo + i];
                        s[u] = dot / std::sqrt(static_cast<double>(hd));
                        mx = std::max(mx, s[u]);
                    }
                    double z = 0;
                    for (auto& e : s) z += (e = std::exp(e - mx));
                    for (std::size_t u = 0; u <= t; ++u)
                        for (std::size_t i = 0; i < hd; ++i) mixed[hh * hd + i] += s[u] / z * v[u][kvo + i];
                }
                (void)kvd;
                const auto o = proj(mixed, L.attn.wo);
                for (std::size_t i = 0; i < d; ++i) x[t][i] += o[i];
            }
        }
        if (!skip_mlp[l]) {
            for (std::size_t t = 0; t < n; ++t) {
                const auto h = norm(x[t], L.mlp.norm);
                auto g = proj(h, L.mlp.gate);
                const auto u = proj(h, L.mlp.up);
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] / (1.0 + std::exp(-g[i])) * u[i];
                const auto o = proj(g, L.mlp.down);
                for (std::size_t i = 0; i < d; ++i) x[t][i] += o[i];
            }
        }
    }
    Mat logits(n);
    for (std::size_t t = 0; t < n; ++t) logits[t] = proj(norm(x[t], w.final_norm), w.lm_head);
    return logits;
}

}  // namespace skiprun::testing
