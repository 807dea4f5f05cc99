#include "skiprun/skip.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <set>

#include "skiprun/error.hpp"

namespace skiprun {

const char* to_string(SkipMode mode) {
    switch (mode) {
        case SkipMode::Block: return "block";
        case SkipMode::Attention: return "attn";
        case SkipMode::Mlp: return "mlp";
    }
    return "?";
}

const char* to_string(Sublayer sublayer) {
    switch (sublayer) {
        case Sublayer::Attention: return "attention";
        case Sublayer::Mlp: return "mlp";
        case Sublayer::Both: return "both";
    }
    return "?";
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<SkipMode> mode_from(std::string_view s) {
    if (s == "attn" || s == "attention") return SkipMode::Attention;
    if (s == "mlp" || s == "ffwd") return SkipMode::Mlp;
    if (s == "block") return SkipMode::Block;
    return std::nullopt;
}

[[noreturn]] void bad_token(std::string_view token, const std::string& why) {
    throw ConfigError("bad skip spec token '" + std::string(token) + "': " + why);
}

Sublayer sublayer_for(SkipMode mode) {
    switch (mode) {
        case SkipMode::Attention: return Sublayer::Attention;
        case SkipMode::Mlp: return Sublayer::Mlp;
        case SkipMode::Block: break;
    }
    return Sublayer::Both;
}

}  // namespace

SkipSpec parse_skip_spec(std::string_view text) {
    SkipSpec spec;
    spec.k.reset();
    bool have_mode = false;
    bool empty_spec = false;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view token = trim(rest.substr(0, comma));
        if (token.empty()) {
            bad_token(token, "empty token");
        } else if (token == "full" || token == "none") {
            empty_spec = true;
        } else if (auto eq = token.find('='); eq == std::string_view::npos) {
            auto m = mode_from(token);
            if (!m) bad_token(token, "expected attn, mlp, block or key=value");
            if (have_mode) bad_token(token, "mode given twice");
            spec.mode = *m;
            have_mode = true;
        } else {
            const std::string_view key = trim(token.substr(0, eq));
            const std::string_view value = trim(token.substr(eq + 1));
            if (key == "mode") {
                auto m = mode_from(value);
                if (!m) bad_token(token, "unknown mode");
                if (have_mode) bad_token(token, "mode given twice");
                spec.mode = *m;
                have_mode = true;
            } else if (key == "k") {
                std::size_t k = 0;
                auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), k);
                if (ec != std::errc() || p != value.data() + value.size()) {
                    bad_token(token, "k must be a non-negative integer");
                }
                if (spec.k || spec.keep_fraction) bad_token(token, "amount given twice");
                spec.k = k;
            } else if (key == "keep") {
                double keep = 0.0;
                auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), keep);
                if (ec != std::errc() || p != value.data() + value.size()) {
                    bad_token(token, "keep must be a number");
                }
                if (!(keep > 0.0 && keep <= 1.0)) bad_token(token, "keep fraction must be in (0, 1]");
                if (spec.k || spec.keep_fraction) bad_token(token, "amount given twice");
                spec.keep_fraction = keep;
            } else if (key == "keep_last") {
                if (value == "true" || value == "1") spec.keep_last = true;
                else if (value == "false" || value == "0") spec.keep_last = false;
                else bad_token(token, "keep_last must be true or false");
            } else {
                bad_token(token, "unknown key");
            }
        }
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    if (empty_spec) {
        if (have_mode || spec.k || spec.keep_fraction) {
            throw ConfigError("bad skip spec '" + std::string(text) + "': full takes no other options");
        }
        const bool keep_last = spec.keep_last;
        spec = SkipSpec::none();
        spec.keep_last = keep_last;
        return spec;
    }
    if (!have_mode) throw ConfigError("bad skip spec '" + std::string(text) + "': missing mode");
    if (!spec.k && !spec.keep_fraction) {
        throw ConfigError("bad skip spec '" + std::string(text) + "': missing k= or keep=");
    }
    return spec;
}

std::string format_skip_spec(const SkipSpec& spec) {
    std::string out = to_string(spec.mode);
    if (spec.k) {
        out += ",k=" + std::to_string(*spec.k);
    } else if (spec.keep_fraction) {
        char buf[32];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, *spec.keep_fraction);
        out += ",keep=" + std::string(buf, p);
    }
    out += spec.keep_last ? ",keep_last=true" : ",keep_last=false";
    return out;
}

SkipSet::SkipSet(std::vector<SkipEntry> entries, std::size_t n_layers)
    : entries_(std::move(entries)), n_layers_(n_layers) {
    std::sort(entries_.begin(), entries_.end(),
              [](const SkipEntry& a, const SkipEntry& b) { return a.layer < b.layer; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto layer = entries_[i].layer;
        if (layer < 1 || layer > n_layers_) {
            throw ConfigError("skip layer " + std::to_string(layer) + " outside 1.." +
                              std::to_string(n_layers_));
        }
        if (i > 0 && entries_[i - 1].layer == layer) {
            throw ConfigError("skip layer " + std::to_string(layer) + " listed twice");
        }
    }
}

bool SkipSet::skips_attention(std::size_t layer0) const {
    for (const auto& e : entries_) {
        if (e.layer == layer0 + 1) return e.sublayer != Sublayer::Mlp;
    }
    return false;
}

bool SkipSet::skips_mlp(std::size_t layer0) const {
    for (const auto& e : entries_) {
        if (e.layer == layer0 + 1) return e.sublayer != Sublayer::Attention;
    }
    return false;
}

SkipSet SkipSet::unite(const SkipSet& other) const {
    const std::size_t n = std::max(n_layers_, other.n_layers_);
    std::vector<SkipEntry> merged;
    for (std::size_t layer = 1; layer <= n; ++layer) {
        const bool attn = skips_attention(layer - 1) || other.skips_attention(layer - 1);
        const bool mlp = skips_mlp(layer - 1) || other.skips_mlp(layer - 1);
        if (attn && mlp) merged.push_back({layer, Sublayer::Both});
        else if (attn) merged.push_back({layer, Sublayer::Attention});
        else if (mlp) merged.push_back({layer, Sublayer::Mlp});
    }
    return SkipSet(std::move(merged), n);
}

std::vector<std::size_t> SkipSet::attention_layers() const {
    std::vector<std::size_t> out;
    for (const auto& e : entries_) {
        if (e.sublayer != Sublayer::Mlp) out.push_back(e.layer);
    }
    return out;
}

std::vector<std::size_t> SkipSet::mlp_layers() const {
    std::vector<std::size_t> out;
    for (const auto& e : entries_) {
        if (e.sublayer != Sublayer::Attention) out.push_back(e.layer);
    }
    return out;
}

std::size_t resolve_k(const SkipSpec& spec, std::size_t n_layers) {
    if (n_layers == 0) throw ConfigError("model must have at least one layer");
    std::size_t k = 0;
    if (spec.k) {
        k = *spec.k;
    } else if (spec.keep_fraction) {
        const double keep = *spec.keep_fraction;
        if (!(keep > 0.0 && keep <= 1.0)) {
            throw ConfigError("keep fraction " + std::to_string(keep) + " outside (0, 1]");
        }
        // std::round is half-away-from-zero
        k = static_cast<std::size_t>(std::round(static_cast<double>(n_layers) * (1.0 - keep)));
    }
    const std::size_t max_k = spec.keep_last ? n_layers - 1 : n_layers;
    if (k > max_k) {
        throw ConfigError("k=" + std::to_string(k) + " exceeds " + std::to_string(max_k) +
                          " for L=" + std::to_string(n_layers) +
                          (spec.keep_last ? " with keep_last" : ""));
    }
    return k;
}

SkipSet resolve(const SkipSpec& spec, std::size_t n_layers) {
    const std::size_t k = resolve_k(spec, n_layers);
    // window {L-k+1..L}, or {L-k..L-1} when the last block is kept
    const std::size_t last = spec.keep_last ? n_layers - 1 : n_layers;
    std::vector<SkipEntry> entries;
    entries.reserve(k);
    for (std::size_t layer = last - k + 1; layer <= last && k > 0; ++layer) {
        entries.push_back({layer, sublayer_for(spec.mode)});
    }
    return SkipSet(std::move(entries), n_layers);
}

SkipSummary describe(const SkipSet& set) {
    SkipSummary s;
    s.n_layers = set.n_layers();
    s.k = set.size();
    s.skipped_attention = set.attention_layers().size();
    s.skipped_mlp = set.mlp_layers().size();
    s.retained_pct = s.n_layers == 0
                         ? 100
                         : static_cast<int>(std::lround(
                               100.0 * (1.0 - static_cast<double>(s.k) / static_cast<double>(s.n_layers))));
    s.label = std::to_string(s.retained_pct) + "%";
    return s;
}

}  // namespace skiprun
