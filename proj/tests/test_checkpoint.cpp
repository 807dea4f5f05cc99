#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "skiprun/checkpoint.hpp"
#include "skiprun/error.hpp"

using namespace skiprun;
using namespace skiprun::testing;

namespace {

std::string save_to_string(const ModelWeights& w) {
    std::ostringstream out(std::ios::binary);
    save_checkpoint(w, out);
    return out.str();
}

ModelWeights load_from_string(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    return load_checkpoint(in);
}

bool same_weights(const ModelWeights& a, const ModelWeights& b) {
    if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
    std::vector<const Tensor*> ta, tb;
    for_each_tensor(a, [&](const std::string&, const Tensor& t) { ta.push_back(&t); });
    for_each_tensor(b, [&](const std::string&, const Tensor& t) { tb.push_back(&t); });
    for (std::size_t i = 0; i < ta.size(); ++i)
        if (!ta[i]->bitwise_equal(*tb[i])) return false;
    return ta.size() == tb.size();
}

CheckpointFault fault_of(const std::string& bytes) {
    try {
        (void)load_from_string(bytes);
    } catch (const CheckpointError& e) {
        return e.fault();
    }
    FAIL("load unexpectedly succeeded");
    return CheckpointFault::Structure;
}

}  // namespace

TEST_CASE("round trip is bit exact") {
    std::mt19937 rng(17);
    for (int i = 0; i < 5; ++i) {
        const auto w = init_random(random_config(rng), rng());
        const auto bytes = save_to_string(w);
        CHECK(same_weights(w, load_from_string(bytes)));
        CHECK(save_to_string(load_from_string(bytes)) == bytes);
    }
}

TEST_CASE("header layout") {
    const auto w = init_random(toy_config(2), 1);
    const auto bytes = save_to_string(w);
    CHECK(bytes.substr(0, 4) == "SKPT");
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    CHECK(version == 1);
    std::uint32_t json_len = 0;
    std::memcpy(&json_len, bytes.data() + 8, 4);
    const auto config = nlohmann::json::parse(bytes.substr(12, json_len));
    CHECK(config.at("n_layers") == 2);
    CHECK(config.at("n_kv_heads") == 2);
    std::uint32_t count = 0;
    std::memcpy(&count, bytes.data() + 12 + json_len, 4);
    CHECK(count == 3 + 2 * 9);
    std::uint32_t name_len = 0;
    std::memcpy(&name_len, bytes.data() + 16 + json_len, 4);
    CHECK(bytes.substr(20 + json_len, name_len) == "embed");
}

TEST_CASE("corruptions map to their faults") {
    const auto w = init_random(toy_config(2), 1);
    const auto bytes = save_to_string(w);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(fault_of(bad_magic) == CheckpointFault::BadMagic);

    auto bad_version = bytes;
    bad_version[4] = 2;
    CHECK(fault_of(bad_version) == CheckpointFault::VersionMismatch);

    CHECK(fault_of(bytes.substr(0, bytes.size() - 7)) == CheckpointFault::Truncated);
    CHECK(fault_of(bytes.substr(0, 10)) == CheckpointFault::Truncated);

    // config claims 3 layers, tensors only cover 2
    auto three = w;
    three.config.n_layers = 3;
    std::string header = std::string("SKPT") + std::string("\x01\x00\x00\x00", 4);
    const std::string cfg = nlohmann::json(three.config).dump();
    const std::uint32_t len = static_cast<std::uint32_t>(cfg.size());
    header.append(reinterpret_cast<const char*>(&len), 4);
    header += cfg;
    std::uint32_t old_len = 0;
    std::memcpy(&old_len, bytes.data() + 8, 4);
    const std::string relabelled = header + bytes.substr(12 + old_len);
    CHECK(fault_of(relabelled) == CheckpointFault::Structure);

    auto trailing = bytes + "junk";
    CHECK(fault_of(trailing) == CheckpointFault::Structure);
}

TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_checkpoint(std::filesystem::path("/nonexistent/model.skpt")), IoError);
}
