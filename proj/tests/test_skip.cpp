#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "skiprun/error.hpp"
#include "skiprun/model.hpp"
#include "skiprun/skip.hpp"

using namespace skiprun;

namespace {

std::vector<std::size_t> layers_of(const SkipSet& s) {
    std::vector<std::size_t> out;
    for (const auto& e : s.entries()) out.push_back(e.layer);
    return out;
}

}  // namespace

TEST_CASE("resolve examples") {
    const SkipSet attn = resolve(SkipSpec::with_k(SkipMode::Attention, 3), 10);
    CHECK(attn.attention_layers() == std::vector<std::size_t>{8, 9, 10});
    CHECK(attn.mlp_layers().empty());

    const SkipSet block = resolve(SkipSpec::with_k(SkipMode::Block, 3, true), 10);
    CHECK(block.attention_layers() == std::vector<std::size_t>{7, 8, 9});
    CHECK(block.mlp_layers() == std::vector<std::size_t>{7, 8, 9});

    const SkipSet quarter = resolve(SkipSpec::with_keep(SkipMode::Block, 0.75), 32);
    CHECK(quarter.size() == 8);
    CHECK(layers_of(quarter).front() == 25);
    CHECK(layers_of(quarter).back() == 32);

    for (SkipMode m : {SkipMode::Block, SkipMode::Attention, SkipMode::Mlp})
        for (bool last : {false, true}) CHECK(resolve(SkipSpec::with_k(m, 0, last), 7).empty());
}

TEST_CASE("k from keep fraction rounds half away from zero") {
    CHECK(resolve_k(SkipSpec::with_keep(SkipMode::Block, 0.66), 32) == 11);
    CHECK(resolve_k(SkipSpec::with_keep(SkipMode::Block, 0.9), 32) == 3);
    CHECK(resolve_k(SkipSpec::with_keep(SkipMode::Block, 0.75), 10) == 3);  // 2.5 -> 3
    CHECK(resolve_k(SkipSpec::with_keep(SkipMode::Block, 1.0), 10) == 0);
    CHECK(resolve_k(SkipSpec::with_keep(SkipMode::Block, 0.66), 40) == 14);
}

TEST_CASE("resolve errors") {
    CHECK_THROWS_AS(resolve(SkipSpec::with_k(SkipMode::Block, 11), 10), ConfigError);
    CHECK_NOTHROW(resolve(SkipSpec::with_k(SkipMode::Block, 10), 10));
    CHECK_THROWS_AS(resolve(SkipSpec::with_k(SkipMode::Block, 10, true), 10), ConfigError);
    CHECK_THROWS_AS(resolve(SkipSpec::with_keep(SkipMode::Mlp, 1.5), 10), ConfigError);
    CHECK_THROWS_AS(resolve(SkipSpec::with_keep(SkipMode::Mlp, 0.0), 10), ConfigError);
    CHECK_THROWS_AS(resolve(SkipSpec::with_k(SkipMode::Mlp, 0), 0), ConfigError);
    CHECK_THROWS_AS(SkipSet({{2, Sublayer::Mlp}, {2, Sublayer::Attention}}, 4), ConfigError);
    CHECK_THROWS_AS(SkipSet({{5, Sublayer::Mlp}}, 4), ConfigError);
    CHECK_THROWS_AS(SkipSet({{0, Sublayer::Mlp}}, 4), ConfigError);
}

TEST_CASE("resolve properties over the whole domain") {
    for (std::size_t L = 1; L <= 40; ++L) {
        for (SkipMode m : {SkipMode::Block, SkipMode::Attention, SkipMode::Mlp}) {
            for (bool last : {false, true}) {
                const std::size_t max_k = last ? L - 1 : L;
                for (std::size_t k = 0; k <= max_k; ++k) {
                    const SkipSet s = resolve(SkipSpec::with_k(m, k, last), L);
                    REQUIRE(s.size() == k);
                    CHECK(s == resolve(SkipSpec::with_k(m, k, last), L));
                    if (last && k > 0) {
                        CHECK(layers_of(s).back() == L - 1);
                        CHECK_FALSE(s.skips_attention(L - 1));
                        CHECK_FALSE(s.skips_mlp(L - 1));
                    }
                    if (!last && k > 0) CHECK(layers_of(s).front() == L - k + 1);
                    for (std::size_t i = 1; i < s.size(); ++i)
                        CHECK(s.entries()[i].layer == s.entries()[i - 1].layer + 1);
                }
            }
        }
    }
}

TEST_CASE("describe labels") {
    CHECK(describe(resolve(SkipSpec::none(), 32)).label == "100%");
    CHECK(describe(resolve(SkipSpec::with_k(SkipMode::Block, 8), 32)).label == "75%");
    const auto s = describe(resolve(SkipSpec::with_k(SkipMode::Attention, 11), 32));
    CHECK(s.label == "66%");
    CHECK(s.skipped_attention == 11);
    CHECK(s.skipped_mlp == 0);
    const auto b = describe(resolve(SkipSpec::with_k(SkipMode::Block, 3), 32));
    CHECK(b.label == "91%");
    CHECK(b.skipped_attention == 3);
    CHECK(b.skipped_mlp == 3);
}

TEST_CASE("parse skip spec") {
    const auto a = parse_skip_spec("attn,keep=0.66,keep_last=false");
    CHECK(a.mode == SkipMode::Attention);
    CHECK(a.keep_fraction == 0.66);
    CHECK_FALSE(a.k.has_value());
    CHECK_FALSE(a.keep_last);

    const auto b = parse_skip_spec("mode=block, k=3, keep_last=true");
    CHECK(b == SkipSpec::with_k(SkipMode::Block, 3, true));
    CHECK(parse_skip_spec("mlp,k=2") == SkipSpec::with_k(SkipMode::Mlp, 2));
    CHECK(resolve(parse_skip_spec("full"), 5).empty());
    CHECK(parse_skip_spec(format_skip_spec(b)) == b);
    CHECK(parse_skip_spec(format_skip_spec(a)) == a);

    for (const char* bad : {"keep=1.5", "attn,keep=1.5", "attn", "attn,k=-1", "attn,k=2,keep=0.5",
                            "conv,k=1", "attn,k=1,", "attn,k=1,keep_last=maybe", "attn,mlp,k=1", "",
                            "attn,foo=1", "full,k=2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_skip_spec(bad), ConfigError);
    }
    try {
        (void)parse_skip_spec("attn,keep=1.5");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("keep=1.5") != std::string::npos);
    }
}

TEST_CASE("unite merges sublayers per layer") {
    const SkipSet attn = resolve(SkipSpec::with_k(SkipMode::Attention, 2), 5);
    const SkipSet mlp = resolve(SkipSpec::with_k(SkipMode::Mlp, 3), 5);
    const SkipSet u = attn.unite(mlp);
    CHECK(u.entries() == std::vector<SkipEntry>{{3, Sublayer::Mlp}, {4, Sublayer::Both}, {5, Sublayer::Both}});
    CHECK(resolve(SkipSpec::with_k(SkipMode::Attention, 2), 5).unite(resolve(SkipSpec::with_k(SkipMode::Mlp, 2), 5)) ==
          resolve(SkipSpec::with_k(SkipMode::Block, 2), 5));
}

TEST_CASE("block skip equals attention skip composed with mlp skip") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const auto c = skiprun::testing::random_config(rng);
        const auto w = init_random(c, rng());
        const auto tokens = skiprun::testing::random_tokens(6, c.vocab_size, rng);
        const std::size_t k = rng() % (c.n_layers + 1);
        const SkipSet block = resolve(SkipSpec::with_k(SkipMode::Block, k), c.n_layers);
        const SkipSet composed = resolve(SkipSpec::with_k(SkipMode::Attention, k), c.n_layers)
                                     .unite(resolve(SkipSpec::with_k(SkipMode::Mlp, k), c.n_layers));
        CHECK(forward(w, tokens, block, nullptr).logits.bitwise_equal(
            forward(w, tokens, composed, nullptr).logits));
    }
}
