#pragma once

#include "taskcodec/codec/model.hpp"
#include "taskcodec/entropy/bitstream.hpp"
#include "taskcodec/entropy/rate.hpp"

namespace taskcodec {

// Inference-mode coding pipeline: analyze, round the hyper latent, derive
// (mu, sigma) from the rounded hyper latent exactly as the decoder will,
// mean-offset round the core latent, range code both streams.
struct CompressResult {
    Bitstream stream;
    Tensor y_hat, z_hat, mu, sigma;
    RateEstimate estimate;  // model estimate on the rounded latents
};

inline CompressResult compress_image(const CodecModel& model, const Tensor& image,
                                     double lambda_tag = 0.0) {
    check_image(image);
    const auto pad = CodecModel::padding_for(image.h(), image.w());

    CompressResult res;
    const Tensor y = model.analyze_t(image);
    const Tensor z = model.hyper_analyze_t(y);
    res.z_hat = quantize_infer(z);
    auto [mu, sigma] = model.hyper_synthesize_t(res.z_hat, y.h(), y.w());
    res.mu = std::move(mu);
    res.sigma = std::move(sigma);
    res.y_hat = quantize_infer(y, &res.mu);

    Tensor resid = y;
    for (size_t i = 0; i < resid.size(); ++i)
        resid[i] = static_cast<double>(std::llround(y[i] - res.mu[i]));

    BitstreamHeader hdr;
    hdr.orig_h = static_cast<uint32_t>(pad.orig_h);
    hdr.orig_w = static_cast<uint32_t>(pad.orig_w);
    hdr.pad_h = static_cast<uint32_t>(pad.pad_h);
    hdr.pad_w = static_cast<uint32_t>(pad.pad_w);
    hdr.config_id = model.config().id();
    hdr.model_id = model.model_id();
    hdr.lambda_tag = lambda_tag;
    res.stream = encode_latents(resid, res.sigma, res.z_hat, model.prior(), hdr);
    res.estimate = RateEstimate(estimate_laplace_bits(res.y_hat, res.mu, res.sigma),
                                estimate_factorized_bits(res.z_hat, model.prior()));
    return res;
}

// Decodes a container back to the clamped reconstruction.
struct DecompressResult {
    Tensor image;  // (1,3,orig_h,orig_w), clamped to [0,1]
    BitstreamHeader header;
    DecodedLatents latents;
};

inline DecompressResult decompress_image(const CodecModel& model, const std::vector<uint8_t>& container) {
    Bitstream bs = Bitstream::parse(container);
    DecompressResult res;
    res.latents = decode_latents(bs, model);
    res.header = bs.header;
    res.image = clamp01(model.synthesize_t(res.latents.y_hat, static_cast<int>(bs.header.orig_h),
                                           static_cast<int>(bs.header.orig_w)));
    return res;
}

}  // namespace taskcodec
