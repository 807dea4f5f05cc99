#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skiprun/config.hpp"
#include "skiprun/tensor.hpp"

namespace skiprun {

// Matrices are stored [in × out] so a projection is x · W.
struct AttentionWeights {
    Tensor wq;    // [d_model × d_model]
    Tensor wk;    // [d_model × kv_dim]
    Tensor wv;    // [d_model × kv_dim]
    Tensor wo;    // [d_model × d_model]
    Tensor norm;  // [d_model]
};

struct MlpWeights {
    Tensor gate;  // [d_model × d_ff]
    Tensor up;    // [d_model × d_ff]
    Tensor down;  // [d_ff × d_model]
    Tensor norm;  // [d_model]
};

struct LayerWeights {
    AttentionWeights attn;
    MlpWeights mlp;
};

struct ModelWeights {
    ModelConfig config;
    Tensor embed;  // [vocab × d_model]
    std::vector<LayerWeights> layers;
    Tensor final_norm;  // [d_model]
    Tensor lm_head;     // [d_model × vocab]

    // Throws ConfigError / ShapeError when any tensor disagrees with config.
    void validate() const;
};

// Visits every tensor with its canonical checkpoint name, in checkpoint order.
void for_each_tensor(const ModelWeights& weights,
                     const std::function<void(const std::string&, const Tensor&)>& fn);
void for_each_tensor(ModelWeights& weights,
                     const std::function<void(const std::string&, Tensor&)>& fn);

// Expected dims of a canonical tensor for the config; empty if name unknown.
std::vector<std::size_t> expected_dims(const ModelConfig& config, const std::string& name);

// Projection, embedding and lm-head entries uniform on [-s, s] with
// s = 1/sqrt(d_model), drawn from mt19937_64(seed). Norm gains are 1.
ModelWeights init_random(const ModelConfig& config, std::uint64_t seed);

// All-zero layer weights (every residual update vanishes); embed, final norm
// and lm-head still random from seed.
ModelWeights init_zero_update(const ModelConfig& config, std::uint64_t seed);

// FNV-1a over names, dims and raw float bytes of every tensor.
std::uint64_t checksum(const ModelWeights& weights);

}  // namespace skiprun
