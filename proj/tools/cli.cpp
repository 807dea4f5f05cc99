#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skiprun/bench.hpp"
#include "skiprun/checkpoint.hpp"
#include "skiprun/csv.hpp"
#include "skiprun/error.hpp"
#include "skiprun/eval.hpp"
#include "skiprun/parallel.hpp"
#include "skiprun/profiler.hpp"
#include "skiprun/skip.hpp"
#include "skiprun/weights.hpp"

namespace skiprun::cli {

namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path);
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + what + ": " + e.what());
    }
}

// Flags parsed by CLI11 plus an optional JSON run-config file. A value set on
// the command line wins over the same key in the file.
struct Options {
    std::string config_path;
    json file = json::object();

    std::string checkpoint;
    std::string synth;  // path to a model-config JSON
    std::uint64_t seed = 0;
    bool zero_update = false;
    std::string model_config;
    std::string out;
    std::string format = "table";
    std::vector<std::string> skips;
    bool sweep = false;
    bool keep_last_sweep = false;
    std::size_t layers = 0;

    std::string prompts_path;
    std::size_t n_prompts = 16;
    std::size_t prompt_len = 50;
    std::uint64_t prompt_seed = 0;
    std::size_t n_sequences = 1000;
    std::size_t warmup = 10;

    std::vector<std::string> tasks;
    std::string corpus;
    std::string scoring = "sum";

    std::string csv_kind;
    std::string csv_file;
};

template <typename T>
void merge(const CLI::App& app, const char* flag, const char* key, const json& file, T& value) {
    const CLI::Option* opt = app.get_option_no_throw(flag);
    if ((opt != nullptr && opt->count() > 0) || !file.contains(key)) return;
    try {
        value = file.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

void load_run_config(const CLI::App& sub, Options& o) {
    if (o.config_path.empty()) return;
    o.file = parse_json(read_text(o.config_path), o.config_path);
    if (!o.file.is_object()) throw ConfigError("run config must be a JSON object");
    const json& f = o.file;
    merge(sub, "--checkpoint", "checkpoint", f, o.checkpoint);
    merge(sub, "--seed", "seed", f, o.seed);
    merge(sub, "--zero-update", "zero_update", f, o.zero_update);
    merge(sub, "--model-config", "model_config", f, o.model_config);
    merge(sub, "--out", "out", f, o.out);
    merge(sub, "--format", "format", f, o.format);
    merge(sub, "--skip", "skip", f, o.skips);
    merge(sub, "--sweep", "sweep", f, o.sweep);
    merge(sub, "--keep-last", "keep_last_sweep", f, o.keep_last_sweep);
    merge(sub, "--layers", "layers", f, o.layers);
    merge(sub, "--prompts", "prompts", f, o.prompts_path);
    merge(sub, "--n-prompts", "n_prompts", f, o.n_prompts);
    merge(sub, "--prompt-len", "prompt_len", f, o.prompt_len);
    merge(sub, "--prompt-seed", "prompt_seed", f, o.prompt_seed);
    merge(sub, "--n-sequences", "n_sequences", f, o.n_sequences);
    merge(sub, "--warmup", "warmup", f, o.warmup);
    merge(sub, "--task", "tasks", f, o.tasks);
    merge(sub, "--corpus", "corpus", f, o.corpus);
    merge(sub, "--scoring", "scoring", f, o.scoring);
    // "synth" may be a path or an inline model-config object
    const CLI::Option* synth_opt = sub.get_option_no_throw("--synth");
    if ((synth_opt == nullptr || synth_opt->count() == 0) && f.contains("synth")) {
        if (f.at("synth").is_string()) {
            o.synth = f.at("synth").get<std::string>();
        } else {
            o.synth = "<inline>";
        }
    }
}

ModelConfig synth_config(const Options& o) {
    if (o.synth == "<inline>") return o.file.at("synth").get<ModelConfig>();
    const json j = parse_json(read_text(o.synth), o.synth);
    return j.get<ModelConfig>();
}

ModelWeights load_model(const Options& o) {
    const bool has_ckpt = !o.checkpoint.empty();
    const bool has_synth = !o.synth.empty();
    if (has_ckpt == has_synth) {
        throw ConfigError("give exactly one of --checkpoint or --synth");
    }
    if (has_ckpt) return load_checkpoint(std::filesystem::path(o.checkpoint));
    const ModelConfig config = synth_config(o);
    return o.zero_update ? init_zero_update(config, o.seed) : init_random(config, o.seed);
}

std::vector<SkipSpec> gather_specs(const Options& o, bool add_baseline) {
    std::vector<SkipSpec> specs;
    if (add_baseline) specs.push_back(SkipSpec::none());
    for (const auto& s : o.skips) specs.push_back(parse_skip_spec(s));
    if (o.sweep) {
        for (bool keep_last : {false, true}) {
            if (keep_last && !o.keep_last_sweep) continue;
            for (SkipMode mode : {SkipMode::Block, SkipMode::Attention, SkipMode::Mlp}) {
                for (double keep : {0.9, 0.75, 0.66}) specs.push_back(SkipSpec::with_keep(mode, keep, keep_last));
            }
        }
    }
    return specs;
}

void emit(const Options& o, std::ostream& out, const std::string& csv, const std::string& table) {
    if (o.format != "csv" && o.format != "table") {
        throw ConfigError("--format must be csv or table");
    }
    const std::string& text = o.format == "csv" ? csv : table;
    if (o.out.empty()) {
        out << text;
    } else {
        write_text(o.out, text);
        out << "wrote " << o.out << "\n";
    }
}

std::string join(const std::vector<std::size_t>& v) {
    if (v.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

int cmd_synth(Options& o, std::ostream& out) {
    if (o.model_config.empty()) throw ConfigError("synth needs --model-config");
    if (o.out.empty()) throw ConfigError("synth needs --out");
    const ModelConfig config = parse_json(read_text(o.model_config), o.model_config).get<ModelConfig>();
    const ModelWeights w = o.zero_update ? init_zero_update(config, o.seed) : init_random(config, o.seed);
    save_checkpoint(w, std::filesystem::path(o.out));
    std::size_t tensors = 0, params = 0;
    for_each_tensor(w, [&](const std::string&, const Tensor& t) {
        ++tensors;
        params += t.size();
    });
    out << "wrote " << o.out << ": " << tensors << " tensors, " << params << " parameters\n";
    return kExitOk;
}

int cmd_plan(Options& o, std::ostream& out) {
    std::size_t n_layers = o.layers;
    if (n_layers == 0) {
        if (o.checkpoint.empty() && o.synth.empty()) throw ConfigError("plan needs --layers or a model");
        n_layers = load_model(o).config.n_layers;
    }
    if (o.skips.empty()) throw ConfigError("plan needs at least one --skip");
    for (const auto& text : o.skips) {
        const SkipSpec spec = parse_skip_spec(text);
        const SkipSet set = resolve(spec, n_layers);
        const SkipSummary s = describe(set);
        out << "spec: " << text << " (L=" << n_layers << ")\n";
        if (s.k == 0) {
            out << "k=0, layers none, label " << s.label << "\n";
        } else {
            out << "k=" << s.k << ", layers " << set.entries().front().layer << ".."
                << set.entries().back().layer << ", label " << s.label << "\n";
        }
        out << "attention skipped: " << join(set.attention_layers()) << "\n";
        out << "mlp skipped: " << join(set.mlp_layers()) << "\n";
    }
    return kExitOk;
}

std::vector<std::vector<TokenId>> read_prompts(const std::string& path) {
    std::istringstream in(read_text(path));
    std::vector<std::vector<TokenId>> prompts;
    std::string line;
    while (std::getline(in, line)) {
        auto tokens = parse_corpus(line);
        if (!tokens.empty()) prompts.push_back(std::move(tokens));
    }
    return prompts;
}

int cmd_profile(Options& o, std::ostream& out) {
    const ModelWeights w = load_model(o);
    const auto prompts = o.prompts_path.empty()
                             ? synthetic_prompts(o.n_prompts, o.prompt_len, w.config.vocab_size, o.prompt_seed)
                             : read_prompts(o.prompts_path);
    const SimilarityProfile p = profile(w, prompts, threads_from_env());
    emit(o, out, profile_csv(p), profile_table(p));
    return kExitOk;
}

int cmd_bench(Options& o, std::ostream& out, std::ostream& err) {
    const ModelWeights w = load_model(o);
    const auto specs = gather_specs(o, true);
    BenchConfig cfg{o.prompt_len, o.n_sequences, o.warmup, o.prompt_seed};
    const BenchReport r = run_bench(w, specs, cfg);
    if (r.clock_warning) err << "warning: clock resolution coarser than 1% of a measured mean\n";
    emit(o, out, bench_csv(r), bench_table(r));
    return kExitOk;
}

int cmd_eval(Options& o, std::ostream& out) {
    const ModelWeights w = load_model(o);
    auto specs = gather_specs(o, true);
    std::vector<McTask> tasks;
    for (const auto& path : o.tasks) tasks.push_back(load_task(path));
    std::optional<std::vector<TokenId>> corpus;
    if (!o.corpus.empty()) corpus = load_corpus(o.corpus);
    ChoiceScoring scoring = ChoiceScoring::Sum;
    if (o.scoring == "mean") scoring = ChoiceScoring::MeanPerToken;
    else if (o.scoring != "sum") throw ConfigError("--scoring must be sum or mean");
    const EvalReport r = eval_sweep(w, specs, tasks, corpus ? &*corpus : nullptr, scoring, threads_from_env());
    emit(o, out, eval_csv(r), eval_table(r));
    return kExitOk;
}

int cmd_validate(Options& o, std::ostream& out) {
    const CsvTable t = validate_csv(parse_csv_kind(o.csv_kind), read_text(o.csv_file));
    out << o.csv_file << ": ok (" << t.rows.size() << " rows)\n";
    return kExitOk;
}

void add_model_source(CLI::App* sub, Options& o) {
    sub->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
    sub->add_option("--synth", o.synth, "Model-config JSON to synthesize weights from");
    sub->add_option("--seed", o.seed, "Seed for --synth weights");
    sub->add_flag("--zero-update", o.zero_update, "Synthesize with all-zero layer weights");
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "JSON run config; flags override its keys");
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->add_option("--format", o.format, "csv or table");
}

void add_specs(CLI::App* sub, Options& o) {
    sub->add_option("--skip", o.skips, "Skip spec, e.g. attn,keep=0.75,keep_last=false (repeatable)");
    sub->add_flag("--sweep", o.sweep, "Add block/attn/mlp at keep 0.9, 0.75, 0.66");
    sub->add_flag("--keep-last", o.keep_last_sweep, "Also sweep the keep-last variants");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"skiprun: transformer inference with deep-layer sublayer skipping"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "Write a random checkpoint from a model config");
    synth->add_option("--model-config", o.model_config, "Model-config JSON");
    synth->add_option("--seed", o.seed, "Weight seed");
    synth->add_flag("--zero-update", o.zero_update, "All-zero layer weights");
    add_common(synth, o);

    auto* plan = app.add_subcommand("plan", "Print the resolved skip set");
    plan->add_option("--layers", o.layers, "Number of layers L");
    add_model_source(plan, o);
    add_common(plan, o);
    plan->add_option("--skip", o.skips, "Skip spec (repeatable)");

    auto* prof = app.add_subcommand("profile", "Per-layer cosine similarity profile");
    add_model_source(prof, o);
    add_common(prof, o);
    prof->add_option("--prompts", o.prompts_path, "One prompt of token ids per line");
    prof->add_option("--n-prompts", o.n_prompts, "Synthetic prompt count");
    prof->add_option("--prompt-len", o.prompt_len, "Synthetic prompt length");
    prof->add_option("--prompt-seed", o.prompt_seed, "Synthetic prompt seed");

    auto* bench = app.add_subcommand("bench", "Single-token latency per skip configuration");
    add_model_source(bench, o);
    add_common(bench, o);
    add_specs(bench, o);
    bench->add_option("--prompt-len", o.prompt_len, "Prompt length");
    bench->add_option("--n-sequences", o.n_sequences, "Timed sequences per configuration");
    bench->add_option("--warmup", o.warmup, "Untimed warmup sequences");
    bench->add_option("--prompt-seed", o.prompt_seed, "Prompt seed");

    auto* eval = app.add_subcommand("eval", "Perplexity and multiple-choice accuracy sweep");
    add_model_source(eval, o);
    add_common(eval, o);
    add_specs(eval, o);
    eval->add_option("--task", o.tasks, "Task JSONL file (repeatable)");
    eval->add_option("--corpus", o.corpus, "Corpus of whitespace-separated token ids");
    eval->add_option("--scoring", o.scoring, "sum or mean (per-token) log-likelihood");

    auto* validate = app.add_subcommand("validate", "Re-parse an emitted CSV report");
    validate->add_option("kind", o.csv_kind, "profile, bench or eval")->required();
    validate->add_option("file", o.csv_file, "CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        load_run_config(*sub, o);
        if (sub == synth) return cmd_synth(o, out);
        if (sub == plan) return cmd_plan(o, out);
        if (sub == prof) return cmd_profile(o, out);
        if (sub == bench) return cmd_bench(o, out, err);
        if (sub == eval) return cmd_eval(o, out);
        if (sub == validate) return cmd_validate(o, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const CheckpointError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitConfig;
}

}  // namespace skiprun::cli
