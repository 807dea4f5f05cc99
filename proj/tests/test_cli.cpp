#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "skiprun/checkpoint.hpp"
#include "skiprun/csv.hpp"

namespace fs = std::filesystem;
using namespace skiprun;

namespace {

fs::path tmp_dir() {
    const char* env = std::getenv("SKIPRUN_TEST_TMP");
    fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "skiprun_cli_test";
    fs::create_directories(dir);
    return dir;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "skiprun");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string write(const std::string& name, const std::string& text) {
    const auto path = tmp_dir() / name;
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kToyConfig =
    R"({"n_layers":2,"d_model":16,"n_heads":4,"n_kv_heads":2,"d_ff":24,"vocab_size":32,"max_seq_len":64,"rope_theta_base":10000.0,"norm_eps":1e-5})";

}  // namespace

TEST_CASE("synth writes a deterministic loadable checkpoint") {
    const auto cfg = write("toy.json", kToyConfig);
    const auto a = (tmp_dir() / "a.skpt").string();
    const auto b = (tmp_dir() / "b.skpt").string();
    auto r = run({"synth", "--model-config", cfg, "--seed", "7", "--out", a});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("21 tensors") != std::string::npos);
    REQUIRE(run({"synth", "--model-config", cfg, "--seed", "7", "--out", b}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(load_checkpoint(fs::path(a)).config.n_layers == 2);

    const auto bench = run({"bench", "--checkpoint", a, "--prompt-len", "4", "--n-sequences", "2", "--warmup", "0",
                            "--format", "csv"});
    CHECK(bench.code == 0);
}

TEST_CASE("synth failures") {
    const auto bad = write("bad.json", "{\"n_layers\": 2,");
    CHECK(run({"synth", "--model-config", bad, "--out", (tmp_dir() / "x.skpt").string()}).code == 2);
    CHECK(run({"synth", "--model-config", (tmp_dir() / "missing.json").string(), "--out",
               (tmp_dir() / "x.skpt").string()})
              .code == 1);
    const auto invalid = write("invalid.json",
                               R"({"n_layers":2,"d_model":18,"n_heads":3,"n_kv_heads":2,"d_ff":8,"vocab_size":8,"max_seq_len":8})");
    CHECK(run({"synth", "--model-config", invalid, "--out", (tmp_dir() / "x.skpt").string()}).code == 2);
    CHECK(run({"synth", "--bogus-flag"}).code == 2);
}

TEST_CASE("plan prints resolved sets") {
    auto r = run({"plan", "--skip", "attn,k=3,keep_last=false", "--layers", "10"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("attention skipped: 8,9,10") != std::string::npos);
    CHECK(r.out.find("mlp skipped: none") != std::string::npos);

    r = run({"plan", "--skip", "block,keep=0.75", "--layers", "32"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("k=8, layers 25..32, label 75%") != std::string::npos);

    r = run({"plan", "--skip", "keep=1.5", "--layers", "32"});
    CHECK(r.code == 2);
    CHECK(r.err.find("keep=1.5") != std::string::npos);

    CHECK(run({"plan", "--skip", "block,k=40", "--layers", "32"}).code == 2);
}

TEST_CASE("bench with full and one attention spec") {
    const auto cfg = write("toy.json", kToyConfig);
    const auto out = (tmp_dir() / "bench.csv").string();
    const auto r = run({"bench", "--synth", cfg, "--skip", "attn,k=1", "--prompt-len", "6", "--n-sequences", "3",
                        "--warmup", "1", "--format", "csv", "--out", out});
    REQUIRE(r.code == 0);
    const auto table = validate_csv(CsvKind::Bench, slurp(out));
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][6] == "0.00");
    CHECK(run({"validate", "bench", out}).code == 0);
}

TEST_CASE("profile on a zero-update model is all ones") {
    const auto cfg = write("toy.json", kToyConfig);
    const auto out = (tmp_dir() / "profile.csv").string();
    const auto r = run({"profile", "--synth", cfg, "--zero-update", "--n-prompts", "3", "--prompt-len", "5",
                        "--format", "csv", "--out", out});
    REQUIRE(r.code == 0);
    const auto table = validate_csv(CsvKind::Profile, slurp(out));
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) CHECK(row[1] == "1.000000");

    const auto prompts = write("prompts.txt", "1 2 3\n\n4 5\n");
    const auto p = run({"profile", "--synth", cfg, "--prompts", prompts, "--format", "csv"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("1,") != std::string::npos);
    CHECK(validate_csv(CsvKind::Profile, p.out).rows[0][2] == "5");
}

TEST_CASE("eval sweep over four keep levels") {
    const auto cfg = write("toy.json", kToyConfig);
    const auto task = write("arc.jsonl",
                            "{\"context\":[1,2],\"choices\":[[3],[4]],\"gold\":0}\n"
                            "{\"context\":[5],\"choices\":[[6,7],[8,9]],\"gold\":1}\n");
    const auto corpus = write("corpus.txt", "1 2 3 4 5 6 7 8 9 10 11 12");
    const auto out = (tmp_dir() / "eval.csv").string();
    const auto r = run({"eval", "--synth", cfg, "--task", task, "--corpus", corpus, "--skip", "attn,keep=0.9",
                        "--skip", "attn,keep=0.75", "--skip", "attn,keep=0.5", "--format", "csv", "--out", out});
    REQUIRE(r.code == 0);
    const auto table = validate_csv(CsvKind::Eval, slurp(out));
    CHECK(table.rows.size() == 4);
    CHECK(table.header[4] == "arc");

    const auto t = run({"eval", "--synth", cfg, "--task", task, "--sweep"});
    REQUIRE(t.code == 0);
    CHECK(t.out.find("Average") != std::string::npos);

    CHECK(run({"eval", "--synth", cfg, "--task", (tmp_dir() / "nope.jsonl").string()}).code == 1);
    CHECK(run({"eval", "--synth", cfg, "--task", task, "--skip", "attn,k=x"}).code == 2);
}

TEST_CASE("model source rules and run-config files") {
    const auto cfg = write("toy.json", kToyConfig);
    CHECK(run({"profile", "--n-prompts", "1"}).code == 2);
    CHECK(run({"profile", "--synth", cfg, "--checkpoint", "x.skpt"}).code == 2);
    CHECK(run({"profile", "--checkpoint", (tmp_dir() / "missing.skpt").string()}).code == 1);

    const auto corrupt = write("corrupt.skpt", "XXXXjunk");
    CHECK(run({"profile", "--checkpoint", corrupt}).code == 1);

    const auto run_cfg = write("run.json", std::string(R"({"synth":)") + kToyConfig +
                                               R"(,"skip":["mlp,k=1"],"prompt_len":5,"n_sequences":2,"warmup":0,"format":"csv"})");
    auto r = run({"bench", "--config", run_cfg});
    REQUIRE(r.code == 0);
    CHECK(validate_csv(CsvKind::Bench, r.out).rows.size() == 2);

    // flags win over the file
    r = run({"bench", "--config", run_cfg, "--skip", "attn,k=1", "--skip", "block,k=2"});
    REQUIRE(r.code == 0);
    const auto table = validate_csv(CsvKind::Bench, r.out);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1][1] == "attn");
    CHECK(table.rows[2][1] == "block");

    CHECK(run({"bench", "--config", write("broken.json", "{")}).code == 2);
}
