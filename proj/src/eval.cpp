#include "skiprun/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skiprun/bench.hpp"
#include "skiprun/error.hpp"
#include "skiprun/model.hpp"
#include "skiprun/numerics.hpp"
#include "skiprun/parallel.hpp"

namespace skiprun {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<TokenId> token_list(const nlohmann::json& j, const char* what, std::size_t line) {
    if (!j.is_array()) {
        throw InputError("line " + std::to_string(line) + ": " + what + " must be an array");
    }
    std::vector<TokenId> out;
    for (const auto& v : j) {
        if (!v.is_number_integer() || v.get<long long>() < 0 ||
            v.get<long long>() > std::numeric_limits<TokenId>::max()) {
            throw InputError("line " + std::to_string(line) + ": " + what +
                             " must hold non-negative token ids");
        }
        out.push_back(v.get<TokenId>());
    }
    return out;
}

// log p(tokens[t] | tokens[<t]) for t in [from, n), from >= 1.
double sum_logprob(const ModelWeights& w, const SkipSet& skip, const std::vector<TokenId>& tokens,
                   std::size_t from) {
    const ForwardResult r = forward(w, tokens, skip, nullptr);
    double total = 0.0;
    for (std::size_t t = from; t < tokens.size(); ++t) {
        const auto row = r.logits.row(t - 1);
        total += static_cast<double>(row[static_cast<std::size_t>(tokens[t])]) - log_sum_exp(row);
    }
    return total;
}

}  // namespace

McTask parse_task(const std::string& jsonl, std::string name) {
    McTask task;
    task.name = std::move(name);
    std::istringstream in(jsonl);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("context") || !j.contains("choices") || !j.contains("gold")) {
            throw InputError("line " + std::to_string(line_no) +
                             ": expected object with context, choices, gold");
        }
        McItem item;
        item.context = token_list(j.at("context"), "context", line_no);
        if (item.context.empty()) {
            throw InputError("line " + std::to_string(line_no) + ": context must not be empty");
        }
        if (!j.at("choices").is_array() || j.at("choices").size() < 2) {
            throw InputError("line " + std::to_string(line_no) + ": need at least 2 choices");
        }
        for (const auto& c : j.at("choices")) item.choices.push_back(token_list(c, "choice", line_no));
        const auto& gold = j.at("gold");
        if (!gold.is_number_integer() || gold.get<long long>() < 0 ||
            gold.get<std::size_t>() >= item.choices.size()) {
            throw InputError("line " + std::to_string(line_no) + ": gold index out of range");
        }
        item.gold = gold.get<std::size_t>();
        task.items.push_back(std::move(item));
    }
    return task;
}

McTask load_task(const std::string& path) {
    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (auto dot = name.find('.'); dot != std::string::npos && dot > 0) name = name.substr(0, dot);
    std::replace(name.begin(), name.end(), ',', '_');
    return parse_task(read_file(path), name);
}

std::vector<TokenId> parse_corpus(const std::string& text) {
    std::istringstream in(text);
    std::vector<TokenId> out;
    std::string word;
    while (in >> word) {
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(word, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != word.size() || v < 0 || v > std::numeric_limits<TokenId>::max()) {
            throw InputError("corpus token '" + word + "' is not a token id");
        }
        out.push_back(static_cast<TokenId>(v));
    }
    return out;
}

std::vector<TokenId> load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

double perplexity(const ModelWeights& weights, const SkipSet& skip,
                  const std::vector<TokenId>& corpus, std::size_t threads) {
    if (corpus.size() < 2) throw InputError("perplexity needs at least 2 corpus tokens");
    const std::size_t window = weights.config.max_seq_len;
    std::vector<std::vector<TokenId>> chunks;
    for (std::size_t start = 0; start < corpus.size(); start += window) {
        const std::size_t end = std::min(corpus.size(), start + window);
        if (end - start >= 2) chunks.emplace_back(corpus.begin() + start, corpus.begin() + end);
    }
    std::vector<double> nll(chunks.size(), 0.0);
    parallel_for(chunks.size(), threads,
                 [&](std::size_t i) { nll[i] = -sum_logprob(weights, skip, chunks[i], 1); });
    double total = 0.0;
    std::size_t predicted = 0;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        total += nll[i];
        predicted += chunks[i].size() - 1;
    }
    return std::exp(total / static_cast<double>(predicted));
}

std::vector<double> score_choices(const ModelWeights& weights, const SkipSet& skip,
                                  const McItem& item) {
    std::vector<double> scores;
    scores.reserve(item.choices.size());
    for (const auto& choice : item.choices) {
        std::vector<TokenId> seq = item.context;
        seq.insert(seq.end(), choice.begin(), choice.end());
        scores.push_back(sum_logprob(weights, skip, seq, item.context.size()));
    }
    return scores;
}

McResult mc_score(const ModelWeights& weights, const SkipSet& skip, const McTask& task,
                  ChoiceScoring scoring, std::size_t threads) {
    enum class Outcome { Skipped, Wrong, Right };
    std::vector<Outcome> outcomes(task.items.size(), Outcome::Skipped);
    parallel_for(task.items.size(), threads, [&](std::size_t i) {
        const McItem& item = task.items[i];
        for (const auto& c : item.choices) {
            if (c.empty()) return;
        }
        std::vector<double> scores = score_choices(weights, skip, item);
        if (scoring == ChoiceScoring::MeanPerToken) {
            for (std::size_t c = 0; c < scores.size(); ++c) {
                scores[c] /= static_cast<double>(item.choices[c].size());
            }
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < scores.size(); ++c) {
            if (scores[c] > scores[best]) best = c;  // strict: lowest index wins ties
        }
        outcomes[i] = best == item.gold ? Outcome::Right : Outcome::Wrong;
    });
    McResult r;
    for (Outcome o : outcomes) {
        if (o == Outcome::Skipped) ++r.skipped;
        else ++r.scored;
        if (o == Outcome::Right) ++r.correct;
    }
    r.accuracy = r.scored ? 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.scored) : 0.0;
    return r;
}

double mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

EvalReport eval_sweep(const ModelWeights& weights, const std::vector<SkipSpec>& specs,
                      const std::vector<McTask>& tasks, const std::vector<TokenId>* corpus,
                      ChoiceScoring scoring, std::size_t threads) {
    if (specs.empty()) throw InputError("eval sweep needs at least one skip spec");
    if (tasks.empty() && corpus == nullptr) throw InputError("eval sweep needs tasks or a corpus");
    EvalReport report;
    for (const auto& t : tasks) report.task_names.push_back(t.name);
    report.has_perplexity = corpus != nullptr;
    for (const auto& spec : specs) {
        const SkipSet set = resolve(spec, weights.config.n_layers);
        EvalRow row;
        row.spec = spec;
        row.k = set.size();
        row.label = bench_label(spec, weights.config.n_layers);
        for (const auto& t : tasks) row.accuracies.push_back(mc_score(weights, set, t, scoring, threads).accuracy);
        row.average = mean(row.accuracies);
        if (corpus) row.perplexity = perplexity(weights, set, *corpus, threads);
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string eval_csv(const EvalReport& report) {
    std::string out = "label,mode,k,keep_last";
    for (const auto& name : report.task_names) out += "," + name;
    out += ",average";
    if (report.has_perplexity) out += ",perplexity";
    out += "\n";
    char buf[64];
    for (const auto& r : report.rows) {
        out += r.label + "," + (r.k == 0 ? "full" : to_string(r.spec.mode)) + "," +
               std::to_string(r.k) + "," + (r.spec.keep_last ? "true" : "false");
        for (double a : r.accuracies) {
            std::snprintf(buf, sizeof buf, ",%.1f", a);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.1f", r.average);
        out += buf;
        if (report.has_perplexity) {
            std::snprintf(buf, sizeof buf, ",%.4f", r.perplexity);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::string eval_table(const EvalReport& report) {
    std::string out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-22s", "model");
    out += buf;
    for (const auto& name : report.task_names) {
        std::snprintf(buf, sizeof buf, " | %10s", name.c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, " | %10s", "Average");
    out += buf;
    if (report.has_perplexity) {
        std::snprintf(buf, sizeof buf, " | %10s", "ppl");
        out += buf;
    }
    out += "\n";
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%-22s", r.label.c_str());
        out += buf;
        for (double a : r.accuracies) {
            std::snprintf(buf, sizeof buf, " | %10.1f", a);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, " | %10.1f", r.average);
        out += buf;
        if (report.has_perplexity) {
            std::snprintf(buf, sizeof buf, " | %10.4f", r.perplexity);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

}  // namespace skiprun
