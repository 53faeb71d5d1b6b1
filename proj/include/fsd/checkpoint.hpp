#pragma once

// Versioned binary model container. Layout, little-endian throughout:
//
//   magic "FSDT" | u32 version | u64 header length | UTF-8 JSON header
//   | raw float32 tensor payloads in directory order | u32 CRC32
//
// The JSON header carries the architecture, the training-set normalization
// statistics and a tensor directory (name + shape per entry). The trailing
// CRC32 covers every preceding byte. Round trips are bit-exact: a saved and
// reloaded model produces identical inference probabilities.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fsd/error.hpp"
#include "fsd/model.hpp"
#include "fsd/normalize.hpp"

namespace fsd {

inline constexpr char kCheckpointMagic[4] = {'F', 'S', 'D', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint64_t epoch = 0;
    double val_f1 = 0.0;
    std::uint64_t seed = 0;
};

struct ModelCheckpoint {
    ModelConfig config;
    NormalizationStats stats; // training-set statistics
    std::vector<std::pair<std::string, Tensor>> tensors;
    CheckpointMeta meta;
};

namespace detail {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t len,
                           std::uint32_t crc = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

template <typename T>
void put_le(std::string& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::uint8_t* p) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
    return v;
}

inline nlohmann::json backbone_to_json(const BackboneConfig& b) {
    return {{"d_model", b.d_model},           {"n_layers", b.n_layers},
            {"n_heads", b.n_heads},           {"max_seq", b.max_seq},
            {"mask_mode", to_string(b.mask_mode)}, {"rope_enabled", b.rope_enabled},
            {"frozen", b.frozen},             {"rope_base", b.rope_base}};
}

inline BackboneConfig backbone_from_json(const nlohmann::json& j) {
    BackboneConfig b;
    b.d_model = j.at("d_model").get<std::size_t>();
    b.n_layers = j.at("n_layers").get<std::size_t>();
    b.n_heads = j.at("n_heads").get<std::size_t>();
    b.max_seq = j.at("max_seq").get<std::size_t>();
    b.mask_mode = mask_mode_from_string(j.at("mask_mode").get<std::string>());
    b.rope_enabled = j.at("rope_enabled").get<bool>();
    b.frozen = j.at("frozen").get<bool>();
    b.rope_base = j.at("rope_base").get<double>();
    return b;
}

inline nlohmann::json stats_to_json(const NormalizationStats& st) {
    nlohmann::json cats = nlohmann::json::array();
    for (std::size_t c = 0; c < FeatureSet::n_categorical; ++c) {
        nlohmann::json counts = nlohmann::json::object();
        for (const auto& [value, count] : st.cat_counts[c])
            counts[std::to_string(value)] = count;
        cats.push_back({{"name", FeatureSet::categorical_name(c)}, {"counts", counts}});
    }
    return {{"scope", to_string(st.scope)},
            {"total_flows", st.total_flows},
            {"num_min", st.num_min},
            {"num_max", st.num_max},
            {"categorical", cats}};
}

inline NormalizationStats stats_from_json(const nlohmann::json& j, const FeatureSet& fs) {
    NormalizationStats st;
    st.feature_set = fs;
    st.scope = norm_scope_from_string(j.at("scope").get<std::string>());
    st.total_flows = j.at("total_flows").get<std::uint64_t>();
    st.num_min = j.at("num_min").get<std::vector<double>>();
    st.num_max = j.at("num_max").get<std::vector<double>>();
    const auto& cats = j.at("categorical");
    for (std::size_t c = 0; c < FeatureSet::n_categorical && c < cats.size(); ++c)
        for (const auto& [key, count] : cats[c].at("counts").items())
            st.cat_counts[c][static_cast<std::uint32_t>(std::stoul(key))] =
                count.get<std::uint64_t>();
    return st;
}

} // namespace detail

// Deep-copies the current parameter values of a model.
inline ModelCheckpoint snapshot_model(DetectionModel& model, const NormalizationStats& stats,
                                      const CheckpointMeta& meta) {
    ModelCheckpoint ckpt;
    ckpt.config = model.config();
    ckpt.stats = stats;
    ckpt.meta = meta;
    for (Parameter* p : model.parameters())
        ckpt.tensors.emplace_back(p->name, Tensor::from_data(p->tensor.shape(),
                                                             p->tensor.data()));
    return ckpt;
}

// Rebuilds a model and overwrites its parameters from the checkpoint.
inline DetectionModel restore_model(const ModelCheckpoint& ckpt) {
    DetectionModel model(ckpt.config);
    auto params = model.parameters();
    if (params.size() != ckpt.tensors.size())
        throw FormatError("checkpoint: expected " + std::to_string(params.size()) +
                          " tensors, found " + std::to_string(ckpt.tensors.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& [name, tensor] = ckpt.tensors[i];
        if (params[i]->name != name)
            throw FormatError("checkpoint: tensor " + std::to_string(i) + " is '" + name +
                              "', expected '" + params[i]->name + "'");
        if (params[i]->tensor.shape() != tensor.shape())
            throw FormatError("checkpoint: tensor '" + name + "' has shape " +
                              shape_str(tensor.shape()) + ", expected " +
                              shape_str(params[i]->tensor.shape()));
        params[i]->tensor.data() = tensor.data();
    }
    return model;
}

inline void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    nlohmann::json header;
    header["format"] = "flow-sequence-detector";
    const ModelConfig& mc = ckpt.config;
    header["model"] = {{"feature_mode", to_string(mc.feature_mode)},
                       {"norm_scope", to_string(mc.norm_scope)},
                       {"n_bins", mc.n_bins},
                       {"tok_hidden", mc.tok_hidden_dim()},
                       {"d_proj", mc.d_proj_dim()},
                       {"rng_seed", mc.rng_seed},
                       {"backbone", detail::backbone_to_json(mc.backbone)}};
    header["stats"] = detail::stats_to_json(ckpt.stats);
    nlohmann::json dir = nlohmann::json::array();
    for (const auto& [name, tensor] : ckpt.tensors)
        dir.push_back({{"name", name}, {"shape", tensor.shape()}});
    header["tensors"] = dir;
    header["meta"] = {{"epoch", ckpt.meta.epoch},
                      {"val_f1", ckpt.meta.val_f1},
                      {"seed", ckpt.meta.seed}};

    const std::string header_text = header.dump();
    std::string blob;
    blob.append(kCheckpointMagic, 4);
    detail::put_le<std::uint32_t>(blob, kCheckpointVersion);
    detail::put_le<std::uint64_t>(blob, header_text.size());
    blob += header_text;
    for (const auto& [name, tensor] : ckpt.tensors)
        for (float v : tensor.data())
            detail::put_le<std::uint32_t>(blob, std::bit_cast<std::uint32_t>(v));
    const std::uint32_t crc =
        detail::crc32(reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size());
    detail::put_le<std::uint32_t>(blob, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("short write: " + path);
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint: " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(blob.data());

    if (blob.size() < 4 + 4 + 8 + 4) throw FormatError("checkpoint: truncated file");
    if (std::memcmp(bytes, kCheckpointMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic bytes");
    const auto version = detail::get_le<std::uint32_t>(bytes + 4);
    if (version != kCheckpointVersion)
        throw VersionError("checkpoint: version " + std::to_string(version) +
                           " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
    const auto header_len = detail::get_le<std::uint64_t>(bytes + 8);
    if (16 + header_len + 4 > blob.size()) throw FormatError("checkpoint: truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(blob.substr(16, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad header: ") + e.what());
    }

    // structural size check before the checksum so truncation is reported
    // as a format problem, not corruption
    try {
        std::size_t payload = 0;
        for (const auto& entry : header.at("tensors"))
            payload += numel(entry.at("shape").get<Shape>()) * 4;
        if (16 + header_len + payload + 4 != blob.size())
            throw FormatError("checkpoint: file size does not match tensor directory");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad tensor directory: ") + e.what());
    }

    const std::uint32_t stored_crc =
        detail::get_le<std::uint32_t>(bytes + blob.size() - 4);
    const std::uint32_t actual_crc = detail::crc32(bytes, blob.size() - 4);
    if (stored_crc != actual_crc) throw ChecksumError("checkpoint: CRC mismatch");

    ModelCheckpoint ckpt;
    try {
        const auto& m = header.at("model");
        ckpt.config.feature_mode = feature_mode_from_string(m.at("feature_mode"));
        ckpt.config.norm_scope = norm_scope_from_string(m.at("norm_scope"));
        ckpt.config.n_bins = m.at("n_bins").get<std::size_t>();
        ckpt.config.tok_hidden = m.at("tok_hidden").get<std::size_t>();
        ckpt.config.d_proj = m.at("d_proj").get<std::size_t>();
        ckpt.config.rng_seed = m.at("rng_seed").get<std::uint64_t>();
        ckpt.config.backbone = detail::backbone_from_json(m.at("backbone"));
        ckpt.stats = detail::stats_from_json(header.at("stats"),
                                             feature_set(ckpt.config.feature_mode));
        ckpt.stats.scope = ckpt.config.norm_scope;
        ckpt.meta.epoch = header.at("meta").at("epoch").get<std::uint64_t>();
        ckpt.meta.val_f1 = header.at("meta").at("val_f1").get<double>();
        ckpt.meta.seed = header.at("meta").at("seed").get<std::uint64_t>();

        std::size_t offset = 16 + header_len;
        for (const auto& entry : header.at("tensors")) {
            const std::string name = entry.at("name").get<std::string>();
            const Shape shape = entry.at("shape").get<Shape>();
            const std::size_t count = numel(shape);
            if (offset + count * 4 + 4 > blob.size())
                throw FormatError("checkpoint: truncated payload at tensor '" + name + "'");
            std::vector<float> data(count);
            for (std::size_t i = 0; i < count; ++i)
                data[i] = std::bit_cast<float>(
                    detail::get_le<std::uint32_t>(bytes + offset + i * 4));
            offset += count * 4;
            ckpt.tensors.emplace_back(name, Tensor::from_data(shape, std::move(data)));
        }
        if (offset + 4 != blob.size())
            throw FormatError("checkpoint: trailing bytes after payload");
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: bad header field: ") + e.what());
    }
    return ckpt;
}

} // namespace fsd
