#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skiprun/kv_cache.hpp"
#include "skiprun/skip.hpp"
#include "skiprun/tensor.hpp"
#include "skiprun/weights.hpp"

namespace skiprun {

struct ForwardOptions {
    // Record the residual stream after the embedding and after every block.
    bool capture = false;
    // Only project the final position through the lm-head.
    bool last_logits_only = false;
};

struct ForwardResult {
    Tensor logits;               // [seq × vocab] or [1 × vocab]
    std::vector<Tensor> hidden;  // L + 1 entries of [seq × d_model] when captured
};

// Pre-norm residual decoder pass over `tokens`, appended at cache->position().
// A skipped branch is omitted whole (norm included): the residual stream
// passes through untouched. With cache == nullptr a scratch cache is used.
ForwardResult forward(const ModelWeights& weights, std::span<const TokenId> tokens,
                      const SkipSet& skip, KvCache* cache, const ForwardOptions& options = {});
ForwardResult forward(const ModelWeights& weights, std::span<const TokenId> tokens,
                      const ForwardOptions& options = {});

// Lowest index wins ties.
TokenId argmax(std::span<const float> logits);

// Greedy decoding: prefill the prompt, then n_new argmax steps, each new token
// fed back through the cache. Returns only the new tokens.
std::vector<TokenId> generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                              std::size_t n_new, const SkipSet& skip, KvCache& cache);
std::vector<TokenId> generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                              std::size_t n_new, const SkipSet& skip);

}  // namespace skiprun
