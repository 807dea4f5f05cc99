#include "skiprun/kv_cache.hpp"

#include "skiprun/error.hpp"

namespace skiprun {

KvCache::KvCache(const ModelConfig& config, const SkipSet& skip)
    : layers_(config.n_layers), kv_dim_(config.kv_dim()), capacity_(config.max_seq_len) {
    if (!skip.empty() && skip.n_layers() != config.n_layers) {
        throw ConfigError("skip set resolved for L=" + std::to_string(skip.n_layers()) +
                          " but model has L=" + std::to_string(config.n_layers));
    }
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (skip.skips_attention(i)) continue;
        layers_[i].allocated = true;
        layers_[i].keys.assign(capacity_ * kv_dim_, 0.0f);
        layers_[i].values.assign(capacity_ * kv_dim_, 0.0f);
    }
}

std::size_t KvCache::bytes() const {
    std::size_t total = 0;
    for (const auto& l : layers_) total += (l.keys.size() + l.values.size()) * sizeof(float);
    return total;
}

std::span<float> KvCache::keys(std::size_t layer0) { return layers_.at(layer0).keys; }
std::span<float> KvCache::values(std::size_t layer0) { return layers_.at(layer0).values; }
std::span<const float> KvCache::keys(std::size_t layer0) const { return layers_.at(layer0).keys; }
std::span<const float> KvCache::values(std::size_t layer0) const { return layers_.at(layer0).values; }

void KvCache::advance(std::size_t n_tokens) {
    if (position_ + n_tokens > capacity_) {
        throw CapacityError("kv cache overflow: position " + std::to_string(position_) + " + " +
                            std::to_string(n_tokens) + " exceeds " + std::to_string(capacity_));
    }
    position_ += n_tokens;
}

}  // namespace skiprun
