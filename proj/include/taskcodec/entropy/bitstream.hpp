#pragma once

#include <cmath>
#include <cstring>
#include <vector>

#include "taskcodec/codec/model.hpp"
#include "taskcodec/entropy/cdf.hpp"
#include "taskcodec/io/bytes.hpp"

namespace taskcodec {

// Bitstream container (bit-exact layout, all fixed-width fields big-endian):
//
//   offset  size  field
//   0       4     magic "TCBS"
//   4       1     version (1)
//   5       4     original height
//   9       4     original width
//   13      4     padded height
//   17      4     padded width
//   21      4     network-config id
//   25      4     model id (weight-fingerprint tag)
//   29      8     lambda tag (IEEE-754 bits)
//   37      4     b2 length | b2 payload (hyper-latent, decoded first)
//   ..      4     b1 length | b1 payload (core latent)
//   ..      4     CRC-32 over every preceding byte
inline constexpr char kBitstreamMagic[4] = {'T', 'C', 'B', 'S'};
inline constexpr uint8_t kBitstreamVersion = 1;
inline constexpr size_t kBitstreamHeaderBytes = 37;

struct BitstreamHeader {
    uint32_t orig_h = 0, orig_w = 0;
    uint32_t pad_h = 0, pad_w = 0;
    uint32_t config_id = 0;
    uint32_t model_id = 0;
    double lambda_tag = 0.0;
};

struct Bitstream {
    BitstreamHeader header;
    std::vector<uint8_t> b1;  // core latent
    std::vector<uint8_t> b2;  // hyper latent
    size_t b1_bits() const { return b1.size() * 8; }
    size_t b2_bits() const { return b2.size() * 8; }

    std::vector<uint8_t> container() const {
        ByteWriter w;
        w.put_bytes(kBitstreamMagic, 4);
        w.put_u8(kBitstreamVersion);
        w.put_u32be(header.orig_h);
        w.put_u32be(header.orig_w);
        w.put_u32be(header.pad_h);
        w.put_u32be(header.pad_w);
        w.put_u32be(header.config_id);
        w.put_u32be(header.model_id);
        w.put_u64be(std::bit_cast<uint64_t>(header.lambda_tag));
        w.put_u32be(static_cast<uint32_t>(b2.size()));
        w.put_bytes(b2.data(), b2.size());
        w.put_u32be(static_cast<uint32_t>(b1.size()));
        w.put_bytes(b1.data(), b1.size());
        w.put_u32be(crc32(w.bytes.data(), w.bytes.size()));
        return std::move(w.bytes);
    }

    size_t container_bits() const { return (kBitstreamHeaderBytes + 8 + b1.size() + b2.size() + 4) * 8; }

    static Bitstream parse(const std::vector<uint8_t>& bytes) {
        require(bytes.size() >= kBitstreamHeaderBytes + 12, ErrorKind::Coding,
                "corrupt stream: container too short");
        const uint32_t stored = ByteReader(bytes.data() + bytes.size() - 4, 4).get_u32be();
        require(crc32(bytes.data(), bytes.size() - 4) == stored, ErrorKind::Coding,
                "corrupt stream: checksum mismatch");
        ByteReader r(bytes.data(), bytes.size() - 4);
        char magic[4];
        r.get_bytes(magic, 4);
        require(std::memcmp(magic, kBitstreamMagic, 4) == 0, ErrorKind::Coding,
                "corrupt stream: bad magic");
        const uint8_t version = r.get_u8();
        require(version == kBitstreamVersion, ErrorKind::Coding,
                "corrupt stream: unsupported version " + std::to_string(version));
        Bitstream bs;
        bs.header.orig_h = r.get_u32be();
        bs.header.orig_w = r.get_u32be();
        bs.header.pad_h = r.get_u32be();
        bs.header.pad_w = r.get_u32be();
        bs.header.config_id = r.get_u32be();
        bs.header.model_id = r.get_u32be();
        bs.header.lambda_tag = std::bit_cast<double>(r.get_u64be());
        const uint32_t l2 = r.get_u32be();
        require(l2 <= r.remaining(), ErrorKind::Coding, "corrupt stream: b2 length out of range");
        bs.b2.resize(l2);
        if (l2) r.get_bytes(bs.b2.data(), l2);
        const uint32_t l1 = r.get_u32be();
        require(l1 == r.remaining(), ErrorKind::Coding, "corrupt stream: b1 length out of range");
        bs.b1.resize(l1);
        if (l1) r.get_bytes(bs.b1.data(), l1);
        return bs;
    }
};

inline int32_t checked_residual(double r) {
    const long long v = std::llround(r);
    require(v >= -kResidualMax && v <= kResidualMax, ErrorKind::Coding,
            "symbol-out-of-alphabet: residual " + std::to_string(v) + " exceeds coding support");
    return static_cast<int32_t>(v);
}

// Encodes quantized latents. y_resid holds the integer residuals
// round(y - mu); sigma conditions the per-element Laplacian tables; z_hat
// holds the rounded hyper latent coded under the factorized prior.
inline Bitstream encode_latents(const Tensor& y_resid, const Tensor& sigma, const Tensor& z_hat,
                                const FactorizedPrior& prior, const BitstreamHeader& header) {
    require(y_resid.same_shape(sigma), ErrorKind::Shape, "encode_latents: sigma shape mismatch");
    require(y_resid.n() == 1 && z_hat.n() == 1, ErrorKind::Shape,
            "encode_latents: one image per stream");
    Bitstream bs;
    bs.header = header;

    {  // b2: hyper latent, per-channel static tables
        RangeEncoder enc;
        std::vector<double> probs;
        std::vector<QuantizedCdf> tables(static_cast<size_t>(z_hat.c()));
        for (int c = 0; c < z_hat.c(); ++c) {
            factorized_alphabet_probs(prior, c, probs);
            tables[static_cast<size_t>(c)] = quantize_cdf(probs);
        }
        for (int n = 0; n < z_hat.n(); ++n)
            for (int c = 0; c < z_hat.c(); ++c) {
                const auto& t = tables[static_cast<size_t>(c)];
                for (int y = 0; y < z_hat.h(); ++y)
                    for (int x = 0; x < z_hat.w(); ++x) {
                        const int32_t s = checked_residual(z_hat.at(n, c, y, x)) + kResidualMax;
                        enc.encode(t.cum[static_cast<size_t>(s)], t.freq[static_cast<size_t>(s)]);
                    }
            }
        bs.b2 = enc.finish();
    }
    {  // b1: core latent, per-element sigma-conditioned tables
        RangeEncoder enc;
        std::vector<double> probs;
        for (int n = 0; n < y_resid.n(); ++n)
            for (int c = 0; c < y_resid.c(); ++c)
                for (int y = 0; y < y_resid.h(); ++y)
                    for (int x = 0; x < y_resid.w(); ++x) {
                        laplace_alphabet_probs(sigma.at(n, c, y, x), probs);
                        const QuantizedCdf t = quantize_cdf(probs);
                        const int32_t s = checked_residual(y_resid.at(n, c, y, x)) + kResidualMax;
                        enc.encode(t.cum[static_cast<size_t>(s)], t.freq[static_cast<size_t>(s)]);
                    }
        bs.b1 = enc.finish();
    }
    return bs;
}

struct DecodedLatents {
    Tensor y_hat;  // residuals + mu
    Tensor z_hat;
    Tensor mu, sigma;
};

// Exact inverse of encode_latents; needs the model to rebuild the entropy
// parameters from the decoded hyper latent.
inline DecodedLatents decode_latents(const Bitstream& bs, const CodecModel& model) {
    require(bs.header.config_id == model.config().id(), ErrorKind::Coding,
            "version-mismatch: bitstream was produced with a different network config");
    require(bs.header.model_id == model.model_id(), ErrorKind::Coding,
            "version-mismatch: bitstream was produced with different model weights");
    require(bs.header.pad_h % 16 == 0 && bs.header.pad_w % 16 == 0 && bs.header.pad_h > 0,
            ErrorKind::Coding, "corrupt stream: padded dims not a multiple of 16");

    const int lat_h = core_latent_extent(static_cast<int>(bs.header.pad_h));
    const int lat_w = core_latent_extent(static_cast<int>(bs.header.pad_w));
    const int hyp_h = hyper_latent_extent(lat_h);
    const int hyp_w = hyper_latent_extent(lat_w);
    const int M = model.config().latent_channels;
    const int N = model.config().hyper_channels;

    DecodedLatents out;
    out.z_hat = Tensor(1, N, hyp_h, hyp_w);
    {
        RangeDecoder dec(bs.b2.data(), bs.b2.size());
        std::vector<double> probs;
        std::vector<QuantizedCdf> tables(static_cast<size_t>(N));
        for (int c = 0; c < N; ++c) {
            factorized_alphabet_probs(model.prior(), c, probs);
            tables[static_cast<size_t>(c)] = quantize_cdf(probs);
        }
        for (int c = 0; c < N; ++c) {
            const auto& t = tables[static_cast<size_t>(c)];
            for (int y = 0; y < hyp_h; ++y)
                for (int x = 0; x < hyp_w; ++x) {
                    const uint32_t s = t.symbol_for_target(dec.decode_target());
                    dec.consume(t.cum[s], t.freq[s]);
                    out.z_hat.at(0, c, y, x) = static_cast<double>(static_cast<int>(s) - kResidualMax);
                }
        }
    }

    auto [mu, sigma] = model.hyper_synthesize_t(out.z_hat, lat_h, lat_w);
    out.mu = std::move(mu);
    out.sigma = std::move(sigma);

    out.y_hat = Tensor(1, M, lat_h, lat_w);
    {
        RangeDecoder dec(bs.b1.data(), bs.b1.size());
        std::vector<double> probs;
        for (int c = 0; c < M; ++c)
            for (int y = 0; y < lat_h; ++y)
                for (int x = 0; x < lat_w; ++x) {
                    laplace_alphabet_probs(out.sigma.at(0, c, y, x), probs);
                    const QuantizedCdf t = quantize_cdf(probs);
                    const uint32_t s = t.symbol_for_target(dec.decode_target());
                    dec.consume(t.cum[s], t.freq[s]);
                    out.y_hat.at(0, c, y, x) =
                        static_cast<double>(static_cast<int>(s) - kResidualMax) + out.mu.at(0, c, y, x);
                }
    }
    return out;
}

}  // namespace taskcodec
