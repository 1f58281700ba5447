#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "taskcodec/common.hpp"

namespace taskcodec {

// Explicit-endianness byte packing; file formats never depend on host layout.
class ByteWriter {
public:
    std::vector<uint8_t> bytes;

    void put_u8(uint8_t v) { bytes.push_back(v); }
    void put_u16le(uint16_t v) {
        for (int i = 0; i < 2; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void put_u32le(uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void put_u64le(uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void put_u32be(uint32_t v) {
        for (int i = 3; i >= 0; --i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void put_u64be(uint64_t v) {
        for (int i = 7; i >= 0; --i) bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void put_f64le(double v) { put_u64le(std::bit_cast<uint64_t>(v)); }
    void put_bytes(const void* p, size_t n) {
        const uint8_t* b = static_cast<const uint8_t*>(p);
        bytes.insert(bytes.end(), b, b + n);
    }
    void put_str(const std::string& s) { put_bytes(s.data(), s.size()); }
    size_t size() const { return bytes.size(); }
};

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t len) : p_(data), len_(len) {}
    explicit ByteReader(const std::vector<uint8_t>& v) : p_(v.data()), len_(v.size()) {}

    size_t pos() const { return pos_; }
    size_t remaining() const { return len_ - pos_; }

    uint8_t get_u8() {
        need(1);
        return p_[pos_++];
    }
    uint16_t get_u16le() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p_[pos_] | (p_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t get_u32le() {
        need(4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | p_[pos_ + static_cast<size_t>(i)];
        pos_ += 4;
        return v;
    }
    uint64_t get_u64le() {
        need(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | p_[pos_ + static_cast<size_t>(i)];
        pos_ += 8;
        return v;
    }
    uint32_t get_u32be() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | p_[pos_ + static_cast<size_t>(i)];
        pos_ += 4;
        return v;
    }
    uint64_t get_u64be() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | p_[pos_ + static_cast<size_t>(i)];
        pos_ += 8;
        return v;
    }
    double get_f64le() { return std::bit_cast<double>(get_u64le()); }
    void get_bytes(void* out, size_t n) {
        need(n);
        std::memcpy(out, p_ + pos_, n);
        pos_ += n;
    }

private:
    void need(size_t n) {
        require(pos_ + n <= len_, ErrorKind::Coding, "corrupt stream: truncated input");
    }
    const uint8_t* p_;
    size_t len_;
    size_t pos_ = 0;
};

inline std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), ErrorKind::Data, "cannot open file: " + path.string());
    f.seekg(0, std::ios::end);
    std::streamoff n = f.tellg();
    f.seekg(0);
    std::vector<uint8_t> buf(static_cast<size_t>(n));
    if (n > 0) f.read(reinterpret_cast<char*>(buf.data()), n);
    require(f.good(), ErrorKind::Data, "read failed: " + path.string());
    return buf;
}

inline void write_file_bytes(const std::filesystem::path& path, const void* data, size_t len) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), ErrorKind::Data, "cannot write file: " + path.string());
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    require(f.good(), ErrorKind::Data, "write failed: " + path.string());
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<uint8_t>& v) {
    write_file_bytes(path, v.data(), v.size());
}

inline void write_file_text(const std::filesystem::path& path, const std::string& s) {
    write_file_bytes(path, s.data(), s.size());
}

inline std::string read_file_text(const std::filesystem::path& path) {
    auto b = read_file_bytes(path);
    return std::string(b.begin(), b.end());
}

}  // namespace taskcodec
