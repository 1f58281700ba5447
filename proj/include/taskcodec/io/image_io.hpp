#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "taskcodec/io/bytes.hpp"
#include "taskcodec/tensor.hpp"

namespace taskcodec {

namespace detail {
inline int parse_pnm_int(const std::vector<uint8_t>& b, size_t& pos) {
    // skip whitespace and comments
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    require(pos < b.size() && std::isdigit(b[pos]), ErrorKind::Data, "malformed PNM header");
    int v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) v = v * 10 + (b[pos++] - '0');
    return v;
}
}  // namespace detail

// 8-bit binary PPM (P6) <-> (1,3,H,W) tensor in [0,1].
inline Tensor read_ppm(const std::filesystem::path& path) {
    const auto b = read_file_bytes(path);
    require(b.size() > 2 && b[0] == 'P' && b[1] == '6', ErrorKind::Data,
            "not a P6 PPM file: " + path.string());
    size_t pos = 2;
    const int w = detail::parse_pnm_int(b, pos);
    const int h = detail::parse_pnm_int(b, pos);
    const int maxval = detail::parse_pnm_int(b, pos);
    require(maxval == 255, ErrorKind::Data, "PPM maxval must be 255: " + path.string());
    ++pos;  // single whitespace after header
    require(b.size() - pos >= static_cast<size_t>(w) * h * 3, ErrorKind::Data,
            "PPM truncated: " + path.string());
    Tensor t(1, 3, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                t.at(0, c, y, x) = b[pos + (static_cast<size_t>(y) * w + x) * 3 + c] / 255.0;
    return t;
}

inline void write_ppm(const std::filesystem::path& path, const Tensor& img) {
    require(img.n() == 1 && img.c() == 3, ErrorKind::Shape, "write_ppm expects (1,3,H,W)");
    std::string header = "P6\n" + std::to_string(img.w()) + " " + std::to_string(img.h()) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + img.size());
    for (int y = 0; y < img.h(); ++y)
        for (int x = 0; x < img.w(); ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = std::min(1.0, std::max(0.0, img.at(0, c, y, x)));
                out.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
            }
    write_file_bytes(path, out);
}

// 8-bit binary PGM (P5) <-> label map (class ids; 255 = ignore).
inline LabelMap read_pgm_labels(const std::filesystem::path& path) {
    const auto b = read_file_bytes(path);
    require(b.size() > 2 && b[0] == 'P' && b[1] == '5', ErrorKind::Data,
            "not a P5 PGM file: " + path.string());
    size_t pos = 2;
    const int w = detail::parse_pnm_int(b, pos);
    const int h = detail::parse_pnm_int(b, pos);
    const int maxval = detail::parse_pnm_int(b, pos);
    require(maxval == 255, ErrorKind::Data, "PGM maxval must be 255: " + path.string());
    ++pos;
    require(b.size() - pos >= static_cast<size_t>(w) * h, ErrorKind::Data,
            "PGM truncated: " + path.string());
    LabelMap m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.at(y, x) = b[pos + static_cast<size_t>(y) * w + x];
    return m;
}

inline void write_pgm_labels(const std::filesystem::path& path, const LabelMap& m) {
    std::string header = "P5\n" + std::to_string(m.w) + " " + std::to_string(m.h) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + m.data.size());
    for (int32_t v : m.data) {
        require(v >= 0 && v <= 255, ErrorKind::Data, "label out of 8-bit range");
        out.push_back(static_cast<uint8_t>(v));
    }
    write_file_bytes(path, out);
}

}  // namespace taskcodec
