#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skiprun/config.hpp"
#include "skiprun/skip.hpp"

namespace skiprun {

// Per-session key/value storage. Layers whose attention is skipped hold no
// storage at all; the layout is fixed at construction and forward() refuses
// to run against a cache built for a different attention layout.
class KvCache {
public:
    KvCache(const ModelConfig& config, const SkipSet& skip);

    std::size_t position() const { return position_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t n_layers() const { return layers_.size(); }
    bool has_layer(std::size_t layer0) const { return layers_.at(layer0).allocated; }

    // Bytes of key + value storage actually allocated.
    std::size_t bytes() const;

    std::span<float> keys(std::size_t layer0);
    std::span<float> values(std::size_t layer0);
    std::span<const float> keys(std::size_t layer0) const;
    std::span<const float> values(std::size_t layer0) const;
    std::size_t kv_dim() const { return kv_dim_; }

    void advance(std::size_t n_tokens);
    void reset() { position_ = 0; }

private:
    struct Layer {
        bool allocated = false;
        std::vector<float> keys;    // [capacity × kv_dim]
        std::vector<float> values;  // [capacity × kv_dim]
    };

    std::vector<Layer> layers_;
    std::size_t kv_dim_ = 0;
    std::size_t capacity_ = 0;
    std::size_t position_ = 0;
};

}  // namespace skiprun
