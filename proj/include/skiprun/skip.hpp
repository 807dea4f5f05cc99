#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skiprun {

// Which residual branch of a block is omitted.
enum class SkipMode { Block, Attention, Mlp };

enum class Sublayer { Attention, Mlp, Both };

const char* to_string(SkipMode mode);
const char* to_string(Sublayer sublayer);

// A user-level request: drop `mode` from the deepest k layers, with k given
// directly or derived from the retained fraction. keep_last shifts the window
// up by one so the final block stays whole.
struct SkipSpec {
    SkipMode mode = SkipMode::Block;
    std::optional<std::size_t> k;
    std::optional<double> keep_fraction;
    bool keep_last = false;

    static SkipSpec none() { return SkipSpec{SkipMode::Block, 0, std::nullopt, false}; }
    static SkipSpec with_k(SkipMode mode, std::size_t k, bool keep_last = false) {
        return SkipSpec{mode, k, std::nullopt, keep_last};
    }
    static SkipSpec with_keep(SkipMode mode, double keep, bool keep_last = false) {
        return SkipSpec{mode, std::nullopt, keep, keep_last};
    }

    bool operator==(const SkipSpec&) const = default;
};

// Parses `attn|mlp|block|full` plus `mode=`, `k=`, `keep=`, `keep_last=`
// tokens separated by commas, e.g. "attn,keep=0.66,keep_last=false".
// `full` (or `none`) is the empty spec. Throws ConfigError naming the
// offending token.
SkipSpec parse_skip_spec(std::string_view text);
std::string format_skip_spec(const SkipSpec& spec);

struct SkipEntry {
    std::size_t layer;  // 1-based
    Sublayer sublayer;

    bool operator==(const SkipEntry&) const = default;
};

// Resolved (layer, sublayer) pairs to omit. Layer indices are 1-based and
// unique; entries are kept sorted by layer.
class SkipSet {
public:
    SkipSet() = default;
    // Throws ConfigError on duplicate layers or indices outside 1..n_layers.
    SkipSet(std::vector<SkipEntry> entries, std::size_t n_layers);

    const std::vector<SkipEntry>& entries() const { return entries_; }
    std::size_t n_layers() const { return n_layers_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    // Zero-based queries used by the forward pass.
    bool skips_attention(std::size_t layer0) const;
    bool skips_mlp(std::size_t layer0) const;

    // Union by layer; attention + mlp at one layer becomes Both.
    SkipSet unite(const SkipSet& other) const;

    // Entries restricted to one branch: Both contributes to either.
    std::vector<std::size_t> attention_layers() const;
    std::vector<std::size_t> mlp_layers() const;

    bool operator==(const SkipSet&) const = default;

private:
    std::vector<SkipEntry> entries_;
    std::size_t n_layers_ = 0;
};

// k = explicit k, or round-half-away(L · (1 − keep)). Throws ConfigError on
// keep outside (0, 1] or k out of range.
std::size_t resolve_k(const SkipSpec& spec, std::size_t n_layers);

SkipSet resolve(const SkipSpec& spec, std::size_t n_layers);

struct SkipSummary {
    std::size_t k = 0;
    std::size_t n_layers = 0;
    std::size_t skipped_attention = 0;
    std::size_t skipped_mlp = 0;
    int retained_pct = 100;
    std::string label;  // "75%"
};

SkipSummary describe(const SkipSet& set);

}  // namespace skiprun
