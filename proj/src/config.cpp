#include "skiprun/config.hpp"

#include "skiprun/error.hpp"

namespace skiprun {

void ModelConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(n_layers, "n_layers");
    positive(d_model, "d_model");
    positive(n_heads, "n_heads");
    positive(n_kv_heads, "n_kv_heads");
    positive(d_ff, "d_ff");
    positive(vocab_size, "vocab_size");
    positive(max_seq_len, "max_seq_len");
    if (d_model % n_heads != 0) {
        throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                          std::to_string(n_heads));
    }
    if (n_heads % n_kv_heads != 0) {
        throw ConfigError("n_heads " + std::to_string(n_heads) +
                          " is not divisible by n_kv_heads " + std::to_string(n_kv_heads));
    }
    if (head_dim() % 2 != 0) {
        throw ConfigError("head dim " + std::to_string(head_dim()) + " must be even for rope");
    }
    if (!(rope_theta_base > 1.0)) throw ConfigError("rope_theta_base must be > 1");
    if (!(norm_eps >= 0.0f)) throw ConfigError("norm_eps must be >= 0");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
    j = nlohmann::json{{"n_layers", c.n_layers},     {"d_model", c.d_model},
                       {"n_heads", c.n_heads},       {"n_kv_heads", c.n_kv_heads},
                       {"d_ff", c.d_ff},             {"vocab_size", c.vocab_size},
                       {"max_seq_len", c.max_seq_len}, {"rope_theta_base", c.rope_theta_base},
                       {"norm_eps", c.norm_eps}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
    if (!j.is_object()) throw ConfigError("model config must be a JSON object");
    auto size_field = [&](const char* name, std::size_t& out) {
        if (!j.contains(name)) throw ConfigError(std::string("model config missing field ") + name);
        const auto& v = j.at(name);
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ConfigError(std::string("model config field ") + name +
                              " must be a non-negative integer");
        }
        out = v.get<std::size_t>();
    };
    size_field("n_layers", c.n_layers);
    size_field("d_model", c.d_model);
    size_field("n_heads", c.n_heads);
    c.n_kv_heads = c.n_heads;
    if (j.contains("n_kv_heads")) size_field("n_kv_heads", c.n_kv_heads);
    size_field("d_ff", c.d_ff);
    size_field("vocab_size", c.vocab_size);
    size_field("max_seq_len", c.max_seq_len);
    if (j.contains("rope_theta_base")) {
        if (!j.at("rope_theta_base").is_number()) throw ConfigError("rope_theta_base must be a number");
        c.rope_theta_base = j.at("rope_theta_base").get<double>();
    }
    if (j.contains("norm_eps")) {
        if (!j.at("norm_eps").is_number()) throw ConfigError("norm_eps must be a number");
        c.norm_eps = j.at("norm_eps").get<float>();
    }
}

ModelConfig parse_model_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid model config JSON: ") + e.what());
    }
    return j.get<ModelConfig>();
}

}  // namespace skiprun
