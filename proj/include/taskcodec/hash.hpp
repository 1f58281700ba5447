#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace taskcodec {

// FNV-1a, used for weight fingerprints and config/model ids.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xCBF29CE484222325ull) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline uint64_t fnv1a64_doubles(const double* v, size_t n, uint64_t seed = 0xCBF29CE484222325ull) {
    return fnv1a64(v, n * sizeof(double), seed);
}

namespace detail {
inline const std::array<uint32_t, 256>& crc32_table() {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    return table;
}
}  // namespace detail

// CRC-32 (IEEE 802.3 polynomial, zlib-compatible).
inline uint32_t crc32(const void* data, size_t len, uint32_t crc = 0) {
    const auto& t = detail::crc32_table();
    const uint8_t* p = static_cast<const uint8_t*>(data);
    crc ^= 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) crc = t[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline uint32_t adler32(const void* data, size_t len) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < len; ++i) {
        a = (a + p[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

inline std::string hex_u64(uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = d[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace taskcodec
