#include "skiprun/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "skiprun/error.hpp"
#include "skiprun/numerics.hpp"

namespace skiprun {

namespace {

void check_inputs(const ModelWeights& w, std::span<const TokenId> tokens, const SkipSet& skip,
                  const KvCache& cache) {
    const auto& c = w.config;
    if (tokens.empty()) throw InputError("forward needs at least one token");
    for (TokenId t : tokens) {
        if (t < 0 || static_cast<std::size_t>(t) >= c.vocab_size) {
            throw InputError("token id " + std::to_string(t) + " outside vocabulary of " +
                             std::to_string(c.vocab_size));
        }
    }
    if (!skip.empty() && skip.n_layers() != c.n_layers) {
        throw ConfigError("skip set resolved for L=" + std::to_string(skip.n_layers()) +
                          " but model has L=" + std::to_string(c.n_layers));
    }
    if (cache.n_layers() != c.n_layers || cache.kv_dim() != c.kv_dim() ||
        cache.capacity() != c.max_seq_len) {
        throw InputError("kv cache was built for a different model config");
    }
    for (std::size_t i = 0; i < c.n_layers; ++i) {
        if (cache.has_layer(i) == skip.skips_attention(i)) {
            throw InputError("kv cache layout does not match the skip set at layer " +
                             std::to_string(i + 1));
        }
    }
    if (cache.position() + tokens.size() > cache.capacity()) {
        throw CapacityError("sequence of " + std::to_string(cache.position() + tokens.size()) +
                            " tokens exceeds max_seq_len " + std::to_string(cache.capacity()));
    }
}

void norm_rows(const Tensor& x, const Tensor& weight, float eps, Tensor& out) {
    for (std::size_t r = 0; r < x.rows(); ++r) rms_norm_into(x.row(r), weight.data(), eps, out.row(r));
}

Tensor project(const Tensor& x, const Tensor& w) { return matmul(x, w); }

void add_into(Tensor& x, const Tensor& delta) {
    auto xs = x.data();
    auto ds = delta.data();
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += ds[i];
}

void attention_branch(const ModelConfig& c, const AttentionWeights& w, std::size_t layer0,
                      Tensor& x, KvCache& cache) {
    const std::size_t n = x.rows();
    const std::size_t d = c.d_model;
    const std::size_t hd = c.head_dim();
    const std::size_t kvd = c.kv_dim();
    const std::size_t group = c.n_heads / c.n_kv_heads;
    const std::size_t pos0 = cache.position();

    Tensor h({n, d});
    norm_rows(x, w.norm, c.norm_eps, h);
    Tensor q = project(h, w.wq);
    Tensor k = project(h, w.wk);
    Tensor v = project(h, w.wv);

    auto keys = cache.keys(layer0);
    auto values = cache.values(layer0);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t pos = pos0 + t;
        for (std::size_t head = 0; head < c.n_heads; ++head) {
            rope_apply_inplace(q.row(t).subspan(head * hd, hd), pos, c.rope_theta_base);
        }
        for (std::size_t head = 0; head < c.n_kv_heads; ++head) {
            rope_apply_inplace(k.row(t).subspan(head * hd, hd), pos, c.rope_theta_base);
        }
        std::copy_n(k.row(t).begin(), kvd, keys.begin() + static_cast<std::ptrdiff_t>(pos * kvd));
        std::copy_n(v.row(t).begin(), kvd, values.begin() + static_cast<std::ptrdiff_t>(pos * kvd));
    }

    const float scale = 1.0f / std::sqrt(static_cast<float>(hd));
    Tensor mixed({n, d});
    std::vector<float> scores(pos0 + n);
    for (std::size_t t = 0; t < n; ++t) {
        const std::size_t span_len = pos0 + t + 1;  // causal: positions 0..pos
        for (std::size_t head = 0; head < c.n_heads; ++head) {
            const std::size_t kv_off = (head / group) * hd;
            const auto qh = q.row(t).subspan(head * hd, hd);
            for (std::size_t s = 0; s < span_len; ++s) {
                const float* ks = keys.data() + s * kvd + kv_off;
                float dot = 0.0f;
                for (std::size_t i = 0; i < hd; ++i) dot += qh[i] * ks[i];
                scores[s] = dot * scale;
            }
            softmax_inplace(std::span<float>(scores.data(), span_len));
            auto out = mixed.row(t).subspan(head * hd, hd);
            for (std::size_t s = 0; s < span_len; ++s) {
                const float p = scores[s];
                const float* vs = values.data() + s * kvd + kv_off;
                for (std::size_t i = 0; i < hd; ++i) out[i] += p * vs[i];
            }
        }
    }
    add_into(x, project(mixed, w.wo));
}

void mlp_branch(const ModelConfig& c, const MlpWeights& w, Tensor& x) {
    const std::size_t n = x.rows();
    Tensor h({n, c.d_model});
    norm_rows(x, w.norm, c.norm_eps, h);
    Tensor gate = project(h, w.gate);
    const Tensor up = project(h, w.up);
    auto g = gate.data();
    auto u = up.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = silu(g[i]) * u[i];
    add_into(x, project(gate, w.down));
}

}  // namespace

ForwardResult forward(const ModelWeights& weights, std::span<const TokenId> tokens,
                      const SkipSet& skip, KvCache* cache, const ForwardOptions& options) {
    std::optional<KvCache> scratch;
    if (cache == nullptr) {
        scratch.emplace(weights.config, skip);
        cache = &*scratch;
    }
    check_inputs(weights, tokens, skip, *cache);
    const auto& c = weights.config;
    const std::size_t n = tokens.size();

    Tensor x({n, c.d_model});
    for (std::size_t t = 0; t < n; ++t) {
        const auto src = weights.embed.row(static_cast<std::size_t>(tokens[t]));
        std::copy(src.begin(), src.end(), x.row(t).begin());
    }

    ForwardResult result;
    if (options.capture) {
        result.hidden.reserve(c.n_layers + 1);
        result.hidden.push_back(x);
    }
    for (std::size_t i = 0; i < c.n_layers; ++i) {
        const auto& layer = weights.layers[i];
        if (!skip.skips_attention(i)) attention_branch(c, layer.attn, i, x, *cache);
        if (!skip.skips_mlp(i)) mlp_branch(c, layer.mlp, x);
        if (options.capture) result.hidden.push_back(x);
    }
    cache->advance(n);

    const std::size_t first = options.last_logits_only ? n - 1 : 0;
    Tensor normed({n - first, c.d_model});
    for (std::size_t t = first; t < n; ++t) {
        rms_norm_into(x.row(t), weights.final_norm.data(), c.norm_eps, normed.row(t - first));
    }
    result.logits = matmul(normed, weights.lm_head);
    return result;
}

ForwardResult forward(const ModelWeights& weights, std::span<const TokenId> tokens,
                      const ForwardOptions& options) {
    return forward(weights, tokens, SkipSet{}, nullptr, options);
}

TokenId argmax(std::span<const float> logits) {
    if (logits.empty()) throw DomainError("argmax of empty logits");
    return static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

std::vector<TokenId> generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                              std::size_t n_new, const SkipSet& skip, KvCache& cache) {
    if (prompt.empty()) throw InputError("generate needs a non-empty prompt");
    if (cache.position() + prompt.size() + n_new > cache.capacity()) {
        throw CapacityError("prompt of " + std::to_string(prompt.size()) + " plus " +
                            std::to_string(n_new) + " new tokens exceeds max_seq_len " +
                            std::to_string(cache.capacity()));
    }
    const ForwardOptions opts{.capture = false, .last_logits_only = true};
    ForwardResult step = forward(weights, prompt, skip, &cache, opts);
    std::vector<TokenId> out;
    out.reserve(n_new);
    for (std::size_t i = 0; i < n_new; ++i) {
        const TokenId next = argmax(step.logits.row(0));
        out.push_back(next);
        step = forward(weights, std::span<const TokenId>(&out.back(), 1), skip, &cache, opts);
    }
    return out;
}

std::vector<TokenId> generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                              std::size_t n_new, const SkipSet& skip) {
    KvCache cache(weights.config, skip);
    return generate(weights, prompt, n_new, skip, cache);
}

}  // namespace skiprun
