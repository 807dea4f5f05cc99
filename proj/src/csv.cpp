#include "skiprun/csv.hpp"

#include <charconv>
#include <cmath>

#include "skiprun/error.hpp"

namespace skiprun {

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.size() - start
                                                                            : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_uint(const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size();
}

bool is_float(const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return !s.empty() && ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

bool is_bool(const std::string& s) { return s == "true" || s == "false"; }

bool is_mode(const std::string& s) {
    return s == "full" || s == "attn" || s == "mlp" || s == "block";
}

[[noreturn]] void fail(std::size_t row, std::size_t col, const std::string& why) {
    throw InputError("csv row " + std::to_string(row) + " column " + std::to_string(col + 1) + ": " + why);
}

void check_header(const CsvTable& t, const std::vector<std::string>& want) {
    if (t.header != want) {
        std::string got;
        for (const auto& h : t.header) got += (got.empty() ? "" : ",") + h;
        throw InputError("unexpected csv header: " + got);
    }
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    std::size_t start = 0;
    bool first = true;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        start = nl + 1;
        if (line.empty()) continue;
        if (first) {
            t.header = split(line);
            first = false;
        } else {
            t.rows.push_back(split(line));
        }
    }
    if (first) throw InputError("csv is empty");
    return t;
}

CsvTable validate_csv(CsvKind kind, std::string_view text) {
    CsvTable t = parse_csv(text);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != t.header.size()) {
            throw InputError("csv row " + std::to_string(r + 1) + " has " +
                             std::to_string(t.rows[r].size()) + " cells, header has " +
                             std::to_string(t.header.size()));
        }
    }
    switch (kind) {
        case CsvKind::Profile: {
            check_header(t, {"layer", "cosine_sim", "n_samples"});
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const auto& row = t.rows[r];
                if (!is_uint(row[0]) || std::stoull(row[0]) != r + 1) fail(r + 1, 0, "layer must be " + std::to_string(r + 1));
                if (!is_float(row[1])) fail(r + 1, 1, "cosine_sim must be a number");
                const double v = std::stod(row[1]);
                if (v < -1.0 || v > 1.0) fail(r + 1, 1, "cosine_sim outside [-1, 1]");
                if (!is_uint(row[2])) fail(r + 1, 2, "n_samples must be a count");
            }
            break;
        }
        case CsvKind::Bench: {
            check_header(t, {"label", "mode", "k", "keep_last", "mean_s", "std_s", "improvement_pct"});
            if (t.rows.empty()) throw InputError("bench csv has no rows");
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const auto& row = t.rows[r];
                if (row[0].empty()) fail(r + 1, 0, "empty label");
                if (!is_mode(row[1])) fail(r + 1, 1, "unknown mode");
                if (!is_uint(row[2])) fail(r + 1, 2, "k must be a count");
                if (!is_bool(row[3])) fail(r + 1, 3, "keep_last must be true/false");
                for (std::size_t c = 4; c < 7; ++c) {
                    if (!is_float(row[c])) fail(r + 1, c, "expected a number");
                }
            }
            if (std::stod(t.rows[0][6]) != 0.0) fail(1, 6, "baseline improvement must be 0");
            break;
        }
        case CsvKind::Eval: {
            const auto& h = t.header;
            if (h.size() < 5 || h[0] != "label" || h[1] != "mode" || h[2] != "k" || h[3] != "keep_last") {
                throw InputError("eval csv header must start with label,mode,k,keep_last");
            }
            const bool ppl = h.back() == "perplexity";
            const std::size_t avg_col = ppl ? h.size() - 2 : h.size() - 1;
            if (h[avg_col] != "average") throw InputError("eval csv header lacks average column");
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                const auto& row = t.rows[r];
                if (!is_mode(row[1])) fail(r + 1, 1, "unknown mode");
                if (!is_uint(row[2])) fail(r + 1, 2, "k must be a count");
                if (!is_bool(row[3])) fail(r + 1, 3, "keep_last must be true/false");
                for (std::size_t c = 4; c < row.size(); ++c) {
                    if (!is_float(row[c])) fail(r + 1, c, "expected a number");
                    const double v = std::stod(row[c]);
                    if (c <= avg_col && (v < 0.0 || v > 100.0)) fail(r + 1, c, "accuracy outside [0, 100]");
                    if (ppl && c == row.size() - 1 && v < 1.0) fail(r + 1, c, "perplexity below 1");
                }
            }
            break;
        }
    }
    return t;
}

CsvKind parse_csv_kind(std::string_view name) {
    if (name == "profile") return CsvKind::Profile;
    if (name == "bench") return CsvKind::Bench;
    if (name == "eval") return CsvKind::Eval;
    throw ConfigError("unknown csv kind '" + std::string(name) + "' (profile, bench, eval)");
}

}  // namespace skiprun
