#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skiprun/skip.hpp"
#include "skiprun/tensor.hpp"
#include "skiprun/weights.hpp"

namespace skiprun {

struct BenchConfig {
    std::size_t prompt_len = 50;
    std::size_t n_sequences = 1000;
    std::size_t warmup_runs = 10;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::string label;  // "75% attn", "100% full"
    SkipSpec spec;
    std::size_t k = 0;
    double mean_s = 0.0;
    double std_s = 0.0;
    double improvement_pct = 0.0;
    std::size_t kv_cache_bytes = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;  // rows[0] is the baseline
    BenchConfig config;
    double clock_resolution_s = 0.0;
    bool clock_warning = false;  // resolution coarser than 1% of a mean
};

// 100 · (t_base − t) / t_base. t_base ≤ 0 → DomainError.
double improvement_pct(double t_base, double t);

// Rounded to 2 decimals, as reported.
double round_to(double value, int decimals);

// n prompts of `len` uniform-random token ids from mt19937_64(seed).
std::vector<std::vector<TokenId>> synthetic_prompts(std::size_t n, std::size_t len,
                                                    std::size_t vocab, std::uint64_t seed);

std::string bench_label(const SkipSpec& spec, std::size_t n_layers);

// Times prefill + one greedy token per sequence for each spec. The empty
// spec is prepended as baseline when absent. Specs are measured round-robin
// per sequence over one shared prompt set so drift hits every row equally.
BenchReport run_bench(const ModelWeights& weights, const std::vector<SkipSpec>& specs,
                      const BenchConfig& cfg);

// Measured smallest nonzero steady_clock step.
double clock_resolution_seconds();

// `label,mode,k,keep_last,mean_s,std_s,improvement_pct`
std::string bench_csv(const BenchReport& report);
// Time ×10² and (%) per mode, one table per keep_last value.
std::string bench_table(const BenchReport& report);

}  // namespace skiprun
