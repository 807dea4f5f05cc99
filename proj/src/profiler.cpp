#include "skiprun/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "skiprun/error.hpp"
#include "skiprun/model.hpp"
#include "skiprun/parallel.hpp"

namespace skiprun {

double cosine(std::span<const float> u, std::span<const float> v) {
    if (u.size() != v.size()) {
        throw DomainError("cosine of vectors with lengths " + std::to_string(u.size()) + " and " +
                          std::to_string(v.size()));
    }
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        uu += static_cast<double>(u[i]) * u[i];
        vv += static_cast<double>(v[i]) * v[i];
    }
    const double nu = std::sqrt(uu);
    const double nv = std::sqrt(vv);
    if (nu < 1e-12 || nv < 1e-12) throw DomainError("cosine undefined for a near-zero vector");
    // rounding can push |cos| a hair past 1
    return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

namespace {

struct PromptSums {
    std::vector<double> sum;
    std::vector<std::size_t> count;
    std::vector<std::size_t> excluded;
};

}  // namespace

SimilarityProfile profile(const ModelWeights& weights,
                          const std::vector<std::vector<TokenId>>& prompts, std::size_t threads) {
    if (prompts.empty()) throw InputError("profile needs at least one prompt");
    const std::size_t n_layers = weights.config.n_layers;
    std::vector<PromptSums> per_prompt(prompts.size());

    parallel_for(prompts.size(), threads, [&](std::size_t p) {
        const ForwardResult r = forward(weights, prompts[p], {.capture = true, .last_logits_only = true});
        PromptSums s{std::vector<double>(n_layers, 0.0), std::vector<std::size_t>(n_layers, 0),
                     std::vector<std::size_t>(n_layers, 0)};
        for (std::size_t layer = 1; layer <= n_layers; ++layer) {
            const Tensor& prev = r.hidden[layer - 1];
            const Tensor& cur = r.hidden[layer];
            for (std::size_t t = 0; t < cur.rows(); ++t) {
                try {
                    s.sum[layer - 1] += cosine(cur.row(t), prev.row(t));
                    ++s.count[layer - 1];
                } catch (const DomainError&) {
                    ++s.excluded[layer - 1];
                }
            }
        }
        per_prompt[p] = std::move(s);
    });

    SimilarityProfile out;
    out.values.assign(n_layers, 0.0);
    out.n_samples.assign(n_layers, 0);
    out.n_excluded.assign(n_layers, 0);
    out.n_prompts = prompts.size();
    std::vector<double> sum(n_layers, 0.0);
    for (std::size_t p = 0; p < prompts.size(); ++p) {
        out.n_tokens += prompts[p].size();
        for (std::size_t i = 0; i < n_layers; ++i) {
            sum[i] += per_prompt[p].sum[i];
            out.n_samples[i] += per_prompt[p].count[i];
            out.n_excluded[i] += per_prompt[p].excluded[i];
        }
    }
    for (std::size_t i = 0; i < n_layers; ++i) {
        out.values[i] = out.n_samples[i] ? sum[i] / static_cast<double>(out.n_samples[i])
                                         : std::nan("");
    }
    return out;
}

std::string profile_csv(const SimilarityProfile& profile) {
    std::string out = "layer,cosine_sim,n_samples\n";
    char buf[96];
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%zu\n", i + 1, profile.values[i],
                      profile.n_samples[i]);
        out += buf;
    }
    return out;
}

std::string profile_table(const SimilarityProfile& profile) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "cosine similarity with previous layer (%zu prompts, %zu tokens)\n",
                  profile.n_prompts, profile.n_tokens);
    out += buf;
    out += "layer  cosine_sim  n_samples  excluded\n";
    for (std::size_t i = 0; i < profile.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%5zu  %10.6f  %9zu  %8zu\n", i + 1, profile.values[i],
                      profile.n_samples[i], profile.n_excluded[i]);
        out += buf;
    }
    return out;
}

}  // namespace skiprun
