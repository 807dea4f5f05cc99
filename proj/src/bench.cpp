#include "skiprun/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "skiprun/error.hpp"
#include "skiprun/kv_cache.hpp"
#include "skiprun/model.hpp"

namespace skiprun {

double improvement_pct(double t_base, double t) {
    if (!(t_base > 0.0)) throw DomainError("baseline time must be positive");
    return 100.0 * (t_base - t) / t_base;
}

double round_to(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

std::vector<std::vector<TokenId>> synthetic_prompts(std::size_t n, std::size_t len,
                                                    std::size_t vocab, std::uint64_t seed) {
    if (vocab == 0) throw ConfigError("vocabulary must be non-empty");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<TokenId>> prompts(n, std::vector<TokenId>(len));
    for (auto& p : prompts) {
        // modulo bias is irrelevant for timing prompts
        for (auto& t : p) t = static_cast<TokenId>(rng() % vocab);
    }
    return prompts;
}

std::string bench_label(const SkipSpec& spec, std::size_t n_layers) {
    const SkipSet set = resolve(spec, n_layers);
    const SkipSummary s = describe(set);
    if (s.k == 0) return "100% full";
    std::string label = s.label + " " + to_string(spec.mode);
    if (spec.keep_last) label += " keep-last";
    return label;
}

double clock_resolution_seconds() {
    using Clock = std::chrono::steady_clock;
    auto best = Clock::duration::max();
    for (int i = 0; i < 64; ++i) {
        const auto t0 = Clock::now();
        auto t1 = Clock::now();
        while (t1 == t0) t1 = Clock::now();
        best = std::min(best, t1 - t0);
    }
    return std::chrono::duration<double>(best).count();
}

BenchReport run_bench(const ModelWeights& weights, const std::vector<SkipSpec>& specs,
                      const BenchConfig& cfg) {
    if (specs.empty()) throw InputError("bench needs at least one skip spec");
    const auto& c = weights.config;
    if (cfg.prompt_len == 0 || cfg.n_sequences == 0) {
        throw ConfigError("prompt_len and n_sequences must be positive");
    }
    if (cfg.prompt_len + 1 > c.max_seq_len) {
        throw ConfigError("prompt_len + 1 = " + std::to_string(cfg.prompt_len + 1) +
                          " exceeds max_seq_len " + std::to_string(c.max_seq_len));
    }

    std::vector<SkipSpec> all;
    const bool has_baseline = std::any_of(specs.begin(), specs.end(), [&](const SkipSpec& s) {
        return resolve(s, c.n_layers).empty();
    });
    if (!has_baseline) all.push_back(SkipSpec::none());
    all.insert(all.end(), specs.begin(), specs.end());
    // baseline first
    std::stable_partition(all.begin(), all.end(),
                          [&](const SkipSpec& s) { return resolve(s, c.n_layers).empty(); });

    std::vector<SkipSet> sets;
    for (const auto& s : all) sets.push_back(resolve(s, c.n_layers));

    const auto prompts =
        synthetic_prompts(cfg.warmup_runs + cfg.n_sequences, cfg.prompt_len, c.vocab_size, cfg.seed);

    using Clock = std::chrono::steady_clock;
    std::vector<double> sum(all.size(), 0.0);
    std::vector<double> sum_sq(all.size(), 0.0);
    std::vector<std::size_t> kv_bytes(all.size(), 0);
    std::vector<KvCache> caches;
    for (std::size_t j = 0; j < all.size(); ++j) {
        caches.emplace_back(c, sets[j]);
        kv_bytes[j] = caches.back().bytes();
    }
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        for (std::size_t j = 0; j < all.size(); ++j) {
            caches[j].reset();
            const auto t0 = Clock::now();
            const auto out = generate(weights, prompts[i], 1, sets[j], caches[j]);
            const auto t1 = Clock::now();
            if (out.size() != 1) throw Error("bench: generate returned no token");
            if (i < cfg.warmup_runs) continue;
            const double dt = std::chrono::duration<double>(t1 - t0).count();
            sum[j] += dt;
            sum_sq[j] += dt * dt;
        }
    }

    BenchReport report;
    report.config = cfg;
    report.clock_resolution_s = clock_resolution_seconds();
    const double n = static_cast<double>(cfg.n_sequences);
    for (std::size_t j = 0; j < all.size(); ++j) {
        BenchRow row;
        row.spec = all[j];
        row.label = bench_label(all[j], c.n_layers);
        row.k = sets[j].size();
        row.mean_s = sum[j] / n;
        const double var = n > 1 ? (sum_sq[j] - n * row.mean_s * row.mean_s) / (n - 1) : 0.0;
        row.std_s = std::sqrt(std::max(var, 0.0));
        row.kv_cache_bytes = kv_bytes[j];
        if (report.clock_resolution_s > 0.01 * row.mean_s) report.clock_warning = true;
        report.rows.push_back(row);
    }
    const double base = report.rows.front().mean_s;
    for (auto& row : report.rows) row.improvement_pct = improvement_pct(base, row.mean_s);
    report.rows.front().improvement_pct = 0.0;
    return report;
}

std::string bench_csv(const BenchReport& report) {
    std::string out = "label,mode,k,keep_last,mean_s,std_s,improvement_pct\n";
    char buf[256];
    for (const auto& r : report.rows) {
        const char* mode = r.k == 0 ? "full" : to_string(r.spec.mode);
        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%s,%.9f,%.9f,%.2f\n", r.label.c_str(), mode, r.k,
                      r.spec.keep_last ? "true" : "false", r.mean_s, r.std_s,
                      round_to(r.improvement_pct, 2));
        out += buf;
    }
    return out;
}

std::string bench_table(const BenchReport& report) {
    if (report.rows.empty()) return {};
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "prompt_len=%zu  n_sequences=%zu  warmup=%zu  (time in s x10^2 per sequence)\n",
                  report.config.prompt_len, report.config.n_sequences, report.config.warmup_runs);
    out += buf;
    if (report.clock_warning) out += "WARNING: clock resolution coarser than 1% of a mean\n";

    const BenchRow& base = report.rows.front();
    const SkipMode modes[] = {SkipMode::Block, SkipMode::Attention, SkipMode::Mlp};
    for (bool keep_last : {false, true}) {
        // retained label -> mode -> row
        std::map<std::size_t, std::map<SkipMode, const BenchRow*>, std::greater<>> grid;
        std::map<std::size_t, std::string> labels;
        for (const auto& r : report.rows) {
            if (r.k == 0 || r.spec.keep_last != keep_last) continue;
            grid[r.k][r.spec.mode] = &r;
            labels[r.k] = r.label.substr(0, r.label.find(' '));
        }
        if (grid.empty()) continue;
        out += keep_last ? "\nlast layer included\n" : "\nno last layer\n";
        std::snprintf(buf, sizeof buf, "%-8s | %18s | %18s | %18s | %s\n", "model", "full",
                      "attention", "ffwd", "kv bytes (full/attn/ffwd)");
        out += buf;
        for (const auto& [k, by_mode] : grid) {
            std::snprintf(buf, sizeof buf, "%-8s", labels[k].c_str());
            out += buf;
            std::string kv;
            for (SkipMode m : modes) {
                auto it = by_mode.find(m);
                if (it == by_mode.end()) {
                    std::snprintf(buf, sizeof buf, " | %18s", "-");
                    kv += "-/";
                } else {
                    std::snprintf(buf, sizeof buf, " | %9.4f %7.2f%%", it->second->mean_s * 100.0,
                                  round_to(it->second->improvement_pct, 2));
                    kv += std::to_string(it->second->kv_cache_bytes) + "/";
                }
                out += buf;
            }
            kv.pop_back();
            out += " | " + kv + "\n";
        }
        std::snprintf(buf, sizeof buf, "%-8s | %9.4f %7.2f%% | %18s | %18s | %zu\n", "100%",
                      base.mean_s * 100.0, 0.0, "-", "-", base.kv_cache_bytes);
        out += buf;
    }
    return out;
}

}  // namespace skiprun
