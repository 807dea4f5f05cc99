#pragma once

#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

namespace skiprun {

// Architecture hyperparameters of a Llama-style decoder.
struct ModelConfig {
    std::size_t n_layers = 0;
    std::size_t d_model = 0;
    std::size_t n_heads = 0;
    std::size_t n_kv_heads = 0;
    std::size_t d_ff = 0;
    std::size_t vocab_size = 0;
    std::size_t max_seq_len = 0;
    double rope_theta_base = 10000.0;
    float norm_eps = 1e-5f;

    std::size_t head_dim() const { return d_model / n_heads; }
    std::size_t kv_dim() const { return n_kv_heads * head_dim(); }

    // Throws ConfigError describing the first violated invariant.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& config);
// Missing fields or wrong types → ConfigError. Does not call validate().
void from_json(const nlohmann::json& j, ModelConfig& config);

ModelConfig parse_model_config(const std::string& json_text);

}  // namespace skiprun
