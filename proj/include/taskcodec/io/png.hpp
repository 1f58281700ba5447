#pragma once

#include <filesystem>
#include <vector>

#include "taskcodec/hash.hpp"
#include "taskcodec/io/bytes.hpp"

namespace taskcodec {

// Minimal PNG writer: 8-bit RGB, zlib stream with stored (uncompressed)
// deflate blocks. No dependencies; plots are small so size hardly matters.
inline void write_png_rgb8(const std::filesystem::path& path, int width, int height,
                           const std::vector<uint8_t>& rgb) {
    require(static_cast<size_t>(width) * height * 3 == rgb.size(), ErrorKind::Shape,
            "write_png_rgb8: buffer size mismatch");
    ByteWriter out;
    static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    out.put_bytes(sig, 8);

    auto chunk = [&out](const char type[4], const std::vector<uint8_t>& data) {
        out.put_u32be(static_cast<uint32_t>(data.size()));
        ByteWriter body;
        body.put_bytes(type, 4);
        body.put_bytes(data.data(), data.size());
        out.put_bytes(body.bytes.data(), body.bytes.size());
        out.put_u32be(crc32(body.bytes.data(), body.bytes.size()));
    };

    {
        ByteWriter ihdr;
        ihdr.put_u32be(static_cast<uint32_t>(width));
        ihdr.put_u32be(static_cast<uint32_t>(height));
        ihdr.put_u8(8);   // bit depth
        ihdr.put_u8(2);   // RGB
        ihdr.put_u8(0);   // deflate
        ihdr.put_u8(0);   // filter method
        ihdr.put_u8(0);   // no interlace
        chunk("IHDR", ihdr.bytes);
    }
    {
        // raw image stream: filter byte 0 before each scanline
        std::vector<uint8_t> raw;
        raw.reserve(static_cast<size_t>(height) * (static_cast<size_t>(width) * 3 + 1));
        for (int y = 0; y < height; ++y) {
            raw.push_back(0);
            const uint8_t* row = rgb.data() + static_cast<size_t>(y) * width * 3;
            raw.insert(raw.end(), row, row + static_cast<size_t>(width) * 3);
        }
        ByteWriter idat;
        idat.put_u8(0x78);  // zlib header, 32K window
        idat.put_u8(0x01);
        size_t pos = 0;
        while (pos < raw.size()) {
            const size_t len = std::min<size_t>(65535, raw.size() - pos);
            const bool final = pos + len == raw.size();
            idat.put_u8(final ? 1 : 0);  // BFINAL, BTYPE=00 (stored)
            idat.put_u16le(static_cast<uint16_t>(len));
            idat.put_u16le(static_cast<uint16_t>(~len));
            idat.put_bytes(raw.data() + pos, len);
            pos += len;
        }
        idat.put_u32be(adler32(raw.data(), raw.size()));
        chunk("IDAT", idat.bytes);
    }
    chunk("IEND", {});
    write_file_bytes(path, out.bytes);
}

}  // namespace taskcodec
