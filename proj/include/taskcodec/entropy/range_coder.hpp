#pragma once

#include <cstdint>
#include <vector>

#include "taskcodec/common.hpp"

namespace taskcodec {

// Byte-oriented integer range coder (carry-less renormalization via a
// 64-bit low register, LZMA style). Frequencies are 16-bit: cum + freq <=
// 65536, freq >= 1. Pure integer arithmetic, so streams are byte-identical
// across platforms.
inline constexpr uint32_t kProbBits = 16;
inline constexpr uint32_t kProbScale = 1u << kProbBits;  // 65536

class RangeEncoder {
public:
    void encode(uint32_t cum, uint32_t freq) {
        const uint32_t r = range_ >> kProbBits;
        low_ += static_cast<uint64_t>(cum) * r;
        range_ = freq * r;
        while (range_ < (1u << 24)) {
            shift_low();
            range_ <<= 8;
        }
    }

    std::vector<uint8_t> finish() {
        for (int i = 0; i < 5; ++i) shift_low();
        return std::move(bytes_);
    }

private:
    void shift_low() {
        if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            bytes_.push_back(static_cast<uint8_t>(cache_ + (low_ >> 32)));
            while (--pending_ > 0) bytes_.push_back(static_cast<uint8_t>(0xFF + (low_ >> 32)));
            cache_ = static_cast<uint8_t>(low_ >> 24);
        }
        ++pending_;
        low_ = (low_ & 0x00FFFFFFull) << 8;
    }

    std::vector<uint8_t> bytes_;
    uint64_t low_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint8_t cache_ = 0;
    int64_t pending_ = 1;
};

class RangeDecoder {
public:
    RangeDecoder(const uint8_t* data, size_t len) : p_(data), end_(data + len) {
        next_byte();  // leading cache byte, always consumed blind
        for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
    }

    // Returns a value in [0, 65536); caller finds the symbol whose
    // [cum, cum+freq) interval contains it, then calls consume().
    uint32_t decode_target() {
        r_ = range_ >> kProbBits;
        uint32_t t = code_ / r_;
        return t < kProbScale ? t : kProbScale - 1;
    }

    void consume(uint32_t cum, uint32_t freq) {
        code_ -= cum * r_;
        range_ = freq * r_;
        while (range_ < (1u << 24)) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

private:
    uint8_t next_byte() {
        // Reading past the payload means the stream was truncated; the
        // container checksum normally catches this first.
        require(p_ < end_, ErrorKind::Coding, "corrupt stream: range coder ran out of bytes");
        return *p_++;
    }

    const uint8_t* p_;
    const uint8_t* end_;
    uint32_t code_ = 0;
    uint32_t range_ = 0xFFFFFFFFu;
    uint32_t r_ = 0;
};

}  // namespace taskcodec
