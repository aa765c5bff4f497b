// Copyright (c) 2026 the cott authors
// SPDX-License-Identifier: Apache-2.0

#include "cott/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cott/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace cott {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'O', 'T', 'T', 'C', 'K', 'P', 'T'};

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value, const std::string& path) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) raise(ErrorCode::CorruptCheckpoint, path + ": truncated");
}

json backbone_config_to_json(const BackboneConfig& config) {
    return json{{"vocab", config.vocab},     {"d_model", config.d_model},
                {"n_layers", config.n_layers}, {"n_heads", config.n_heads},
                {"d_ff", config.d_ff},         {"max_len", config.max_len}};
}

BackboneConfig backbone_config_from_json(const json& j) {
    BackboneConfig config;
    config.vocab = j.at("vocab").get<std::vector<std::string>>();
    config.d_model = j.at("d_model").get<int>();
    config.n_layers = j.at("n_layers").get<int>();
    config.n_heads = j.at("n_heads").get<int>();
    config.d_ff = j.at("d_ff").get<int>();
    config.max_len = j.at("max_len").get<int>();
    return config;
}

}  // namespace

void write_file_atomically(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(ErrorCode::InvalidConfig, "cannot write " + tmp);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) raise(ErrorCode::InvalidConfig, "failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void save_checkpoint(const std::string& path, const ReferenceBackbone& backbone,
                     const ProjectionHead& head, const TaskSpec& task,
                     const json& train_config_echo) {
    auto tensors = backbone.named_parameters();
    for (auto& [name, p] : head.named_parameters()) tensors.emplace_back(name, p);

    json header;
    header["backbone"] = backbone_config_to_json(backbone.config());
    header["seed"] = backbone.seed();
    header["virtual_words"] = backbone.virtual_words();
    header["task_spec"] = task.to_json();
    header["train_config"] = train_config_echo;
    json manifest = json::array();
    for (const auto& [name, p] : tensors)
        manifest.push_back(json{{"name", name}, {"rows", p->value.rows()},
                                {"cols", p->value.cols()}});
    header["tensors"] = std::move(manifest);
    const std::string header_text = header.dump();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) raise(ErrorCode::InvalidConfig, "cannot write " + tmp);
        out.write(kMagic, sizeof(kMagic));
        write_raw(out, kCheckpointVersion);
        write_raw(out, static_cast<std::uint64_t>(header_text.size()));
        out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
        for (const auto& [name, p] : tensors) {
            // Eigen is column-major; dump row-major for a stable layout
            for (Eigen::Index r = 0; r < p->value.rows(); ++r)
                for (Eigen::Index c = 0; c < p->value.cols(); ++c)
                    write_raw(out, p->value(r, c));
        }
        if (!out) raise(ErrorCode::InvalidConfig, "failed writing " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::CorruptCheckpoint, "cannot open " + path);

    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        raise(ErrorCode::CorruptCheckpoint, path + ": bad magic");
    std::uint32_t version = 0;
    read_raw(in, version, path);
    if (version != kCheckpointVersion)
        raise(ErrorCode::VersionMismatch, path + ": file has version " +
                                              std::to_string(version) + ", reader supports " +
                                              std::to_string(kCheckpointVersion));
    std::uint64_t header_len = 0;
    read_raw(in, header_len, path);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) raise(ErrorCode::CorruptCheckpoint, path + ": truncated header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::CorruptCheckpoint, path + ": bad header: " + e.what());
    }

    LoadedCheckpoint out;
    try {
        BackboneConfig config = backbone_config_from_json(header.at("backbone"));
        out.backbone = std::make_unique<ReferenceBackbone>(
            config, header.at("seed").get<std::uint64_t>());
        out.backbone->bind_virtual_words(
            header.at("virtual_words").get<std::vector<std::string>>());
        out.task = TaskSpec::from_json(header.at("task_spec"));
        out.train_config_echo = std::make_shared<json>(header.at("train_config"));
    } catch (const json::exception& e) {
        raise(ErrorCode::CorruptCheckpoint, path + ": bad header: " + e.what());
    }

    auto tensors = out.backbone->named_parameters();
    const int d = out.backbone->hidden_dim();
    out.head = ProjectionHead::from_weights(ag::Mat::Zero(d, d), ag::Mat::Zero(d, d));
    for (auto& [name, p] : out.head.named_parameters()) tensors.emplace_back(name, p);

    const json& manifest = header.at("tensors");
    if (manifest.size() != tensors.size())
        raise(ErrorCode::CorruptCheckpoint,
              path + ": tensor manifest does not match the architecture");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& entry = manifest.at(i);
        auto& [name, p] = tensors[i];
        if (entry.at("name").get<std::string>() != name ||
            entry.at("rows").get<Eigen::Index>() != p->value.rows() ||
            entry.at("cols").get<Eigen::Index>() != p->value.cols())
            raise(ErrorCode::CorruptCheckpoint,
                  path + ": tensor " + name + " does not match the manifest");
        for (Eigen::Index r = 0; r < p->value.rows(); ++r)
            for (Eigen::Index c = 0; c < p->value.cols(); ++c) read_raw(in, p->value(r, c), path);
    }
    return out;
}

}  // namespace cott
