#include "skiprun/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "skiprun/error.hpp"

namespace skiprun {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

// Guards against absurd headers before allocating.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(void* dst, std::size_t n, const char* what) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw CheckpointError(CheckpointFault::Truncated,
                                  std::string("unexpected end of file reading ") + what);
        }
    }

    template <typename T>
    T get(const char* what) {
        T v{};
        bytes(&v, sizeof v, what);
        return v;
    }

    std::string string(std::size_t n, const char* what) {
        std::string s(n, '\0');
        bytes(s.data(), n, what);
        return s;
    }

    bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& in_;
};

}  // namespace

void save_checkpoint(const ModelWeights& weights, std::ostream& out) {
    weights.validate();
    out.write(kCheckpointMagic, 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    const std::string config = nlohmann::json(weights.config).dump();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
    out.write(config.data(), static_cast<std::streamsize>(config.size()));

    std::uint32_t count = 0;
    for_each_tensor(weights, [&](const std::string&, const Tensor&) { ++count; });
    put<std::uint32_t>(out, count);
    for_each_tensor(weights, [&](const std::string& name, const Tensor& t) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.ndims()));
        for (std::size_t d : t.dims()) put<std::uint64_t>(out, d);
        put<std::uint8_t>(out, 0);
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.size() * sizeof(float)));
    });
    if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const ModelWeights& weights, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    save_checkpoint(weights, out);
}

ModelWeights load_checkpoint(std::istream& in) {
    Reader r(in);
    char magic[4];
    r.bytes(magic, 4, "magic");
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw CheckpointError(CheckpointFault::BadMagic, "file does not start with SKPT");
    }
    const auto version = r.get<std::uint32_t>("version");
    if (version != kCheckpointVersion) {
        throw CheckpointError(CheckpointFault::VersionMismatch,
                              "got version " + std::to_string(version) + ", expected " +
                                  std::to_string(kCheckpointVersion));
    }
    const auto config_len = r.get<std::uint32_t>("config length");
    const std::string config_text = r.string(config_len, "config");

    ModelConfig config;
    try {
        config = parse_model_config(config_text);
        config.validate();
    } catch (const ConfigError& e) {
        throw CheckpointError(CheckpointFault::Structure, std::string("bad config: ") + e.what());
    }

    std::map<std::string, Tensor> tensors;
    const auto count = r.get<std::uint32_t>("tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = r.get<std::uint32_t>("tensor name length");
        std::string name = r.string(name_len, "tensor name");
        const auto ndims = r.get<std::uint32_t>("tensor rank");
        if (ndims == 0 || ndims > 8) {
            throw CheckpointError(CheckpointFault::Structure,
                                  "tensor " + name + " has rank " + std::to_string(ndims));
        }
        std::vector<std::size_t> dims(ndims);
        std::uint64_t elements = 1;
        for (auto& d : dims) {
            const auto v = r.get<std::uint64_t>("tensor dims");
            if (v == 0 || v > kMaxElements || elements * v > kMaxElements) {
                throw CheckpointError(CheckpointFault::Structure, "tensor " + name + " has bad dims");
            }
            d = static_cast<std::size_t>(v);
            elements *= v;
        }
        const auto dtype = r.get<std::uint8_t>("dtype");
        if (dtype != 0) {
            throw CheckpointError(CheckpointFault::Structure,
                                  "tensor " + name + " has unsupported dtype " + std::to_string(dtype));
        }
        const auto want = expected_dims(config, name);
        if (want.empty()) {
            throw CheckpointError(CheckpointFault::Structure, "unexpected tensor " + name);
        }
        if (want != dims) {
            throw CheckpointError(CheckpointFault::Structure,
                                  "tensor " + name + " has shape " + shape_string(dims) +
                                      ", config implies " + shape_string(want));
        }
        std::vector<float> data(static_cast<std::size_t>(elements));
        r.bytes(data.data(), data.size() * sizeof(float), "tensor payload");
        if (!tensors.emplace(name, Tensor(dims, std::move(data))).second) {
            throw CheckpointError(CheckpointFault::Structure, "duplicate tensor " + name);
        }
    }
    if (!r.at_end()) {
        throw CheckpointError(CheckpointFault::Structure, "trailing bytes after last tensor");
    }

    ModelWeights w;
    w.config = config;
    w.layers.resize(config.n_layers);
    std::size_t expected = 0;
    for_each_tensor(w, [&](const std::string& name, Tensor& t) {
        ++expected;
        auto it = tensors.find(name);
        if (it == tensors.end()) {
            throw CheckpointError(CheckpointFault::Structure, "missing tensor " + name);
        }
        t = std::move(it->second);
    });
    if (expected != count) {
        throw CheckpointError(CheckpointFault::Structure,
                              "expected " + std::to_string(expected) + " tensors, found " +
                                  std::to_string(count));
    }
    return w;
}

ModelWeights load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    return load_checkpoint(in);
}

}  // namespace skiprun
