#include "wuglab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "wuglab/error.hpp"

namespace wuglab {

namespace {

constexpr char kMagic[8] = {'W', 'U', 'G', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
    char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(bytes, 8);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    }
    out.write(bytes, 4);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw CorruptFileError("checkpoint truncated while reading u64");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return v;
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw CorruptFileError("checkpoint truncated while reading u32");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return v;
}

nlohmann::json config_to_json(const ModelConfig& config) {
    return nlohmann::json{{"vocab_size", config.vocab_size},
                          {"d_model", config.d_model},
                          {"n_layers", config.n_layers},
                          {"n_heads", config.n_heads},
                          {"ffn_multiplier", config.ffn_multiplier},
                          {"max_seq_len", config.max_seq_len},
                          {"novel_slots", config.novel_slots},
                          {"mask_token_id", config.mask_token_id},
                          {"pad_token_id", config.pad_token_id},
                          {"init_std", config.init_std},
                          {"ln_epsilon", config.ln_epsilon}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig config;
    config.vocab_size = j.at("vocab_size").get<std::size_t>();
    config.d_model = j.at("d_model").get<std::size_t>();
    config.n_layers = j.at("n_layers").get<std::size_t>();
    config.n_heads = j.at("n_heads").get<std::size_t>();
    config.ffn_multiplier = j.at("ffn_multiplier").get<std::size_t>();
    config.max_seq_len = j.at("max_seq_len").get<std::size_t>();
    config.novel_slots = j.at("novel_slots").get<std::size_t>();
    config.mask_token_id = j.at("mask_token_id").get<int>();
    config.pad_token_id = j.at("pad_token_id").get<int>();
    config.init_std = j.at("init_std").get<double>();
    config.ln_epsilon = j.at("ln_epsilon").get<double>();
    return config;
}

}  // namespace

void save_checkpoint(const Parameters& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open checkpoint for writing: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);

    const std::string config_text = config_to_json(params.config).dump();
    write_u64(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));

    write_u64(out, params.tensors.size());
    for (const auto& [name, tensor] : params.tensors) {
        write_u64(out, name.size());
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(out, tensor.rank());
        for (std::size_t dim : tensor.shape()) {
            write_u64(out, dim);
        }
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            write_u64(out, std::bit_cast<std::uint64_t>(tensor[i]));
        }
    }
    if (!out) {
        throw Error("write failure on checkpoint: " + path);
    }
}

Parameters load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open checkpoint for reading: " + path);
    }
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || !std::equal(magic, magic + 8, kMagic)) {
        throw CorruptFileError("not a checkpoint file (bad magic): " + path);
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw VersionMismatchError("checkpoint version " + std::to_string(version) +
                                   " does not match supported version " +
                                   std::to_string(kVersion));
    }

    const std::uint64_t config_len = read_u64(in);
    std::string config_text(config_len, '\0');
    if (!in.read(config_text.data(), static_cast<std::streamsize>(config_len))) {
        throw CorruptFileError("checkpoint truncated in config block");
    }
    Parameters params;
    try {
        params.config = config_from_json(nlohmann::json::parse(config_text));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("checkpoint config unreadable: ") + e.what());
    }

    const std::uint64_t n_tensors = read_u64(in);
    for (std::uint64_t t = 0; t < n_tensors; ++t) {
        const std::uint64_t name_len = read_u64(in);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), static_cast<std::streamsize>(name_len))) {
            throw CorruptFileError("checkpoint truncated in tensor name");
        }
        const std::uint64_t rank = read_u64(in);
        std::vector<std::size_t> shape;
        for (std::uint64_t r = 0; r < rank; ++r) {
            shape.push_back(static_cast<std::size_t>(read_u64(in)));
        }
        Tensor tensor(shape);
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            tensor[i] = std::bit_cast<double>(read_u64(in));
        }
        params.tensors.emplace(std::move(name), std::move(tensor));
    }
    return params;
}

}  // namespace wuglab
