#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "taskcodec/hash.hpp"
#include "taskcodec/io/bytes.hpp"
#include "taskcodec/params.hpp"

namespace taskcodec {

using nlohmann::json;

// Checkpoint container: self-describing, versioned, bitwise round-trip
// stable (tensor payloads are raw IEEE-754 little-endian bytes).
//
//   "TCKP" | version u8 | kind u8 | meta_len u32le | meta JSON (UTF-8)
//   | tensor_count u32le | { name_len u16le | name | n,c,h,w u32le | f64le... }*
//   | crc32 u32le over everything above
inline constexpr char kCheckpointMagic[4] = {'T', 'C', 'K', 'P'};
inline constexpr uint8_t kCheckpointVersion = 1;

enum class CheckpointKind : uint8_t { Codec = 0, TaskNet = 1 };

struct LoadedCheckpoint {
    CheckpointKind kind;
    json meta;
    std::vector<std::pair<std::string, Tensor>> tensors;
};

inline void save_checkpoint(const std::filesystem::path& path, CheckpointKind kind,
                            const json& meta, const ParamStore& params) {
    ByteWriter w;
    w.put_bytes(kCheckpointMagic, 4);
    w.put_u8(kCheckpointVersion);
    w.put_u8(static_cast<uint8_t>(kind));
    const std::string m = meta.dump();
    w.put_u32le(static_cast<uint32_t>(m.size()));
    w.put_str(m);
    w.put_u32le(static_cast<uint32_t>(params.items().size()));
    for (const auto& [name, var] : params.items()) {
        w.put_u16le(static_cast<uint16_t>(name.size()));
        w.put_str(name);
        const Tensor& t = var->value;
        w.put_u32le(static_cast<uint32_t>(t.n()));
        w.put_u32le(static_cast<uint32_t>(t.c()));
        w.put_u32le(static_cast<uint32_t>(t.h()));
        w.put_u32le(static_cast<uint32_t>(t.w()));
        for (size_t i = 0; i < t.size(); ++i) w.put_f64le(t[i]);
    }
    w.put_u32le(crc32(w.bytes.data(), w.bytes.size()));
    write_file_bytes(path, w.bytes);
}

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    require(bytes.size() >= 14, ErrorKind::Data, "checkpoint too short: " + path.string());
    const uint32_t stored_crc = ByteReader(bytes.data() + bytes.size() - 4, 4).get_u32le();
    require(crc32(bytes.data(), bytes.size() - 4) == stored_crc, ErrorKind::Data,
            "checkpoint checksum mismatch: " + path.string());

    ByteReader r(bytes.data(), bytes.size() - 4);
    char magic[4];
    r.get_bytes(magic, 4);
    require(std::memcmp(magic, kCheckpointMagic, 4) == 0, ErrorKind::Data,
            "not a checkpoint file: " + path.string());
    const uint8_t version = r.get_u8();
    require(version == kCheckpointVersion, ErrorKind::Data,
            "unsupported checkpoint version: " + std::to_string(version));

    LoadedCheckpoint out;
    out.kind = static_cast<CheckpointKind>(r.get_u8());
    const uint32_t mlen = r.get_u32le();
    std::string meta(mlen, '\0');
    r.get_bytes(meta.data(), mlen);
    out.meta = json::parse(meta);
    const uint32_t count = r.get_u32le();
    out.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t nlen = r.get_u16le();
        std::string name(nlen, '\0');
        r.get_bytes(name.data(), nlen);
        const int n = static_cast<int>(r.get_u32le());
        const int c = static_cast<int>(r.get_u32le());
        const int h = static_cast<int>(r.get_u32le());
        const int ww = static_cast<int>(r.get_u32le());
        Tensor t(n, c, h, ww);
        for (size_t k = 0; k < t.size(); ++k) t[k] = r.get_f64le();
        out.tensors.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

// Copies checkpoint tensors into an already-constructed store (names and
// shapes must match exactly).
inline void restore_params(ParamStore& store, const LoadedCheckpoint& ck) {
    require(store.items().size() == ck.tensors.size(), ErrorKind::Data,
            "checkpoint parameter count mismatch");
    for (size_t i = 0; i < ck.tensors.size(); ++i) {
        const auto& [name, tensor] = ck.tensors[i];
        const auto& [sname, var] = store.items()[i];
        require(name == sname, ErrorKind::Data, "checkpoint parameter name mismatch: " + name);
        require(tensor.same_shape(var->value), ErrorKind::Data,
                "checkpoint parameter shape mismatch: " + name);
        var->value = tensor;
    }
}

}  // namespace taskcodec
