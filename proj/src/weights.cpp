#include "skiprun/weights.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "skiprun/error.hpp"

namespace skiprun {

namespace {

template <typename Weights, typename Fn>
void visit_tensors(Weights& w, Fn&& fn) {
    fn(std::string("embed"), w.embed);
    for (std::size_t i = 0; i < w.layers.size(); ++i) {
        const std::string p = "layers." + std::to_string(i) + ".";
        auto& l = w.layers[i];
        fn(p + "attn.wq", l.attn.wq);
        fn(p + "attn.wk", l.attn.wk);
        fn(p + "attn.wv", l.attn.wv);
        fn(p + "attn.wo", l.attn.wo);
        fn(p + "attn.norm", l.attn.norm);
        fn(p + "mlp.gate", l.mlp.gate);
        fn(p + "mlp.up", l.mlp.up);
        fn(p + "mlp.down", l.mlp.down);
        fn(p + "mlp.norm", l.mlp.norm);
    }
    fn(std::string("final_norm"), w.final_norm);
    fn(std::string("lm_head"), w.lm_head);
}

// Uniform on [-scale, scale] from the top 24 bits of each draw; independent
// of the standard library's distribution implementations.
class UniformSource {
public:
    UniformSource(std::uint64_t seed, float scale) : rng_(seed), scale_(scale) {}

    float next() {
        const auto bits = static_cast<std::uint32_t>(rng_() >> 40);  // 24 bits
        const float unit = static_cast<float>(bits) * (1.0f / 16777216.0f);  // [0, 1)
        return (2.0f * unit - 1.0f) * scale_;
    }

    Tensor tensor(std::vector<std::size_t> dims) {
        Tensor t(std::move(dims));
        for (float& v : t.data()) v = next();
        return t;
    }

private:
    std::mt19937_64 rng_;
    float scale_;
};

ModelWeights allocate(const ModelConfig& config) {
    ModelWeights w;
    w.config = config;
    w.embed = Tensor(expected_dims(config, "embed"));
    w.layers.resize(config.n_layers);
    for (std::size_t i = 0; i < config.n_layers; ++i) {
        auto& l = w.layers[i];
        const std::string p = "layers." + std::to_string(i) + ".";
        l.attn.wq = Tensor(expected_dims(config, p + "attn.wq"));
        l.attn.wk = Tensor(expected_dims(config, p + "attn.wk"));
        l.attn.wv = Tensor(expected_dims(config, p + "attn.wv"));
        l.attn.wo = Tensor(expected_dims(config, p + "attn.wo"));
        l.attn.norm = Tensor(expected_dims(config, p + "attn.norm"), 1.0f);
        l.mlp.gate = Tensor(expected_dims(config, p + "mlp.gate"));
        l.mlp.up = Tensor(expected_dims(config, p + "mlp.up"));
        l.mlp.down = Tensor(expected_dims(config, p + "mlp.down"));
        l.mlp.norm = Tensor(expected_dims(config, p + "mlp.norm"), 1.0f);
    }
    w.final_norm = Tensor(expected_dims(config, "final_norm"), 1.0f);
    w.lm_head = Tensor(expected_dims(config, "lm_head"));
    return w;
}

bool is_norm(const std::string& name) {
    return name.ends_with("norm");
}

}  // namespace

void for_each_tensor(const ModelWeights& weights,
                     const std::function<void(const std::string&, const Tensor&)>& fn) {
    visit_tensors(weights, fn);
}

void for_each_tensor(ModelWeights& weights,
                     const std::function<void(const std::string&, Tensor&)>& fn) {
    visit_tensors(weights, fn);
}

std::vector<std::size_t> expected_dims(const ModelConfig& c, const std::string& name) {
    if (name == "embed") return {c.vocab_size, c.d_model};
    if (name == "final_norm") return {c.d_model};
    if (name == "lm_head") return {c.d_model, c.vocab_size};
    if (!name.starts_with("layers.")) return {};
    const auto dot = name.find('.', 7);
    if (dot == std::string::npos) return {};
    const std::string index = name.substr(7, dot - 7);
    if (index.empty() || index.find_first_not_of("0123456789") != std::string::npos) return {};
    if (std::stoull(index) >= c.n_layers) return {};
    const std::string leaf = name.substr(dot + 1);
    if (leaf == "attn.wq" || leaf == "attn.wo") return {c.d_model, c.d_model};
    if (leaf == "attn.wk" || leaf == "attn.wv") return {c.d_model, c.kv_dim()};
    if (leaf == "attn.norm" || leaf == "mlp.norm") return {c.d_model};
    if (leaf == "mlp.gate" || leaf == "mlp.up") return {c.d_model, c.d_ff};
    if (leaf == "mlp.down") return {c.d_ff, c.d_model};
    return {};
}

void ModelWeights::validate() const {
    config.validate();
    if (layers.size() != config.n_layers) {
        throw ConfigError("weights hold " + std::to_string(layers.size()) + " layers, config says " +
                          std::to_string(config.n_layers));
    }
    for_each_tensor(*this, [&](const std::string& name, const Tensor& t) {
        const auto want = expected_dims(config, name);
        if (t.dims() != want) {
            throw ShapeError("tensor " + name + " has shape " + t.shape_string() + ", expected " +
                             shape_string(want));
        }
    });
}

ModelWeights init_random(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelWeights w = allocate(config);
    UniformSource src(seed, 1.0f / std::sqrt(static_cast<float>(config.d_model)));
    for_each_tensor(w, [&](const std::string& name, Tensor& t) {
        if (is_norm(name)) return;
        for (float& v : t.data()) v = src.next();
    });
    return w;
}

ModelWeights init_zero_update(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelWeights w = allocate(config);
    UniformSource src(seed, 1.0f / std::sqrt(static_cast<float>(config.d_model)));
    for (float& v : w.embed.data()) v = src.next();
    for (float& v : w.lm_head.data()) v = src.next();
    return w;
}

std::uint64_t checksum(const ModelWeights& weights) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for_each_tensor(weights, [&](const std::string& name, const Tensor& t) {
        mix(name.data(), name.size());
        for (std::size_t d : t.dims()) mix(&d, sizeof d);
        mix(t.data().data(), t.size() * sizeof(float));
    });
    return h;
}

}  // namespace skiprun
