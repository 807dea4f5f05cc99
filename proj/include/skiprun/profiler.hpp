#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "skiprun/tensor.hpp"
#include "skiprun/weights.hpp"

namespace skiprun {

// u·v / (|u||v|) in double. Throws DomainError on length mismatch or when
// either norm is below 1e-12.
double cosine(std::span<const float> u, std::span<const float> v);

struct SimilarityProfile {
    // values[i] is layer i+1 against layer i (layer 0 = embedding output).
    std::vector<double> values;
    std::vector<std::size_t> n_samples;
    std::vector<std::size_t> n_excluded;  // near-zero-norm pairs dropped
    std::size_t n_prompts = 0;
    std::size_t n_tokens = 0;
};

// Per-token cosine between consecutive post-block hidden states of the
// unskipped model, averaged over every position of every prompt.
SimilarityProfile profile(const ModelWeights& weights,
                          const std::vector<std::vector<TokenId>>& prompts,
                          std::size_t threads = 1);

// header `layer,cosine_sim,n_samples`, 1-based layers, 6 decimals.
std::string profile_csv(const SimilarityProfile& profile);
std::string profile_table(const SimilarityProfile& profile);

}  // namespace skiprun
