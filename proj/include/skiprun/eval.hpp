#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "skiprun/skip.hpp"
#include "skiprun/tensor.hpp"
#include "skiprun/weights.hpp"

namespace skiprun {

struct McItem {
    std::vector<TokenId> context;
    std::vector<std::vector<TokenId>> choices;
    std::size_t gold = 0;
};

struct McTask {
    std::string name;
    std::vector<McItem> items;
};

// One JSON object per line: {"context":[..],"choices":[[..],..],"gold":n}.
// Blank lines are ignored. Malformed lines → InputError with line number.
McTask parse_task(const std::string& jsonl, std::string name = "task");
McTask load_task(const std::string& path);

// Whitespace-separated integer token ids.
std::vector<TokenId> parse_corpus(const std::string& text);
std::vector<TokenId> load_corpus(const std::string& path);

enum class ChoiceScoring {
    Sum,           // summed log-likelihood
    MeanPerToken,  // summed log-likelihood / choice length
};

struct McResult {
    double accuracy = 0.0;  // percent of scored items
    std::size_t correct = 0;
    std::size_t scored = 0;
    std::size_t skipped = 0;  // items with an empty choice
};

// Teacher-forced exp(mean NLL) over positions t >= 1. Corpora longer than
// max_seq_len are split into consecutive windows, each predicted from its
// own first token.
double perplexity(const ModelWeights& weights, const SkipSet& skip,
                  const std::vector<TokenId>& corpus, std::size_t threads = 1);

// Sum of log p(choice tokens | context, earlier choice tokens), one entry per
// choice.
std::vector<double> score_choices(const ModelWeights& weights, const SkipSet& skip,
                                  const McItem& item);

McResult mc_score(const ModelWeights& weights, const SkipSet& skip, const McTask& task,
                  ChoiceScoring scoring = ChoiceScoring::Sum, std::size_t threads = 1);

struct EvalRow {
    std::string label;
    SkipSpec spec;
    std::size_t k = 0;
    std::vector<double> accuracies;  // per task, percent
    double average = 0.0;            // mean of accuracies
    double perplexity = 0.0;         // 0 when no corpus
};

struct EvalReport {
    std::vector<std::string> task_names;
    bool has_perplexity = false;
    std::vector<EvalRow> rows;
};

double mean(const std::vector<double>& values);

EvalReport eval_sweep(const ModelWeights& weights, const std::vector<SkipSpec>& specs,
                      const std::vector<McTask>& tasks, const std::vector<TokenId>* corpus,
                      ChoiceScoring scoring = ChoiceScoring::Sum, std::size_t threads = 1);

// `label,mode,k,keep_last,<task>...,average[,perplexity]`, 1 decimal for
// accuracies, 4 for perplexity.
std::string eval_csv(const EvalReport& report);
std::string eval_table(const EvalReport& report);

}  // namespace skiprun
