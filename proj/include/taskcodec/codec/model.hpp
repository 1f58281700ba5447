#pragma once

#include <cmath>
#include <utility>

#include "taskcodec/codec/config.hpp"
#include "taskcodec/entropy/factorized.hpp"
#include "taskcodec/nn_ops.hpp"
#include "taskcodec/params.hpp"

namespace taskcodec {

// The compressive autoencoder: analysis/synthesis transforms (four stride-2
// stages each), hyper-analysis/hyper-synthesis (two stride-2 stages each),
// and the factorized prior for the hyper-latent. All transforms build tape
// nodes; feed constants for pure inference.
class CodecModel {
public:
    CodecModel(NetworkConfig cfg, uint64_t seed) : cfg_(cfg) {
        Rng rng(seed ^ 0x5EEDC0DEC0FFEEull);
        const int M = cfg.latent_channels, N = cfg.hyper_channels;
        const int kc = cfg.core_kernel, kh = cfg.hyper_kernel, k1 = cfg.hyper_head_kernel;

        // g_a: 3 -> M -> M -> M -> M, stride-2 convs, ReLU between
        ga_w_[0] = conv_param("g_a.0", M, 3, kc, rng, 2.0);
        ga_w_[1] = conv_param("g_a.1", M, M, kc, rng, 2.0);
        ga_w_[2] = conv_param("g_a.2", M, M, kc, rng, 2.0);
        ga_w_[3] = conv_param("g_a.3", M, M, kc, rng, 1.0);
        // g_s: transposed convs M -> M -> M -> M -> 3
        gs_w_[0] = tconv_param("g_s.0", M, M, kc, rng, 2.0);
        gs_w_[1] = tconv_param("g_s.1", M, M, kc, rng, 2.0);
        gs_w_[2] = tconv_param("g_s.2", M, M, kc, rng, 2.0);
        gs_w_[3] = tconv_param("g_s.3", M, 3, kc, rng, 1.0);
        // h_a: stride-1 head then two stride-2 convs
        ha_w_[0] = conv_param("h_a.0", N, M, k1, rng, 2.0);
        ha_w_[1] = conv_param("h_a.1", N, N, kh, rng, 2.0);
        ha_w_[2] = conv_param("h_a.2", N, N, kh, rng, 1.0);
        // h_s: two stride-2 transposed convs then stride-1 conv to 2M (mu, sigma)
        hs_w_[0] = tconv_param("h_s.0", N, N, kh, rng, 2.0);
        hs_w_[1] = tconv_param("h_s.1", N, N, kh, rng, 2.0);
        hs_w_[2] = conv_param("h_s.2", 2 * M, N, k1, rng, 1.0);
        // start sigma_raw near 1 so the scale map is clear of the clamp
        {
            Tensor& b = hs_w_[2].second->value;
            for (int c = M; c < 2 * M; ++c) b[static_cast<size_t>(c)] = 1.0;
        }
        prior_ = FactorizedPrior(params_, N, rng);
    }

    CodecModel(const CodecModel&) = delete;
    CodecModel& operator=(const CodecModel&) = delete;
    CodecModel(CodecModel&&) = default;
    CodecModel& operator=(CodecModel&&) = default;

    CodecModel clone() const {
        CodecModel m(cfg_, 0);
        m.params_.load_values_from(params_);
        return m;
    }

    const NetworkConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    FactorizedPrior& prior() { return prior_; }
    const FactorizedPrior& prior() const { return prior_; }
    uint64_t fingerprint() const { return params_.fingerprint(); }
    uint32_t model_id() const { return static_cast<uint32_t>(fingerprint()); }

    struct Padding {
        int orig_h, orig_w, pad_h, pad_w;
    };

    static Padding padding_for(int h, int w) {
        return Padding{h, w, round_up(h, 16), round_up(w, 16)};
    }

    // Reflect-pads bottom/right up to the next multiple of 16.
    static Var pad_input(const Var& x) {
        check_image(x->value);
        const Padding p = padding_for(x->value.h(), x->value.w());
        if (p.pad_h == p.orig_h && p.pad_w == p.orig_w) return x;
        return reflect_pad(x, 0, p.pad_h - p.orig_h, 0, p.pad_w - p.orig_w);
    }

    // x (N,3,H,W), H,W >= 64 -> y (N,M,ceil(H/16),ceil(W/16))
    Var analyze(const Var& x) const {
        Var t = pad_input(x);
        const int pc = cfg_.core_kernel / 2;
        t = relu(conv2d(t, ga_w_[0].first, ga_w_[0].second, 2, pc));
        t = relu(conv2d(t, ga_w_[1].first, ga_w_[1].second, 2, pc));
        t = relu(conv2d(t, ga_w_[2].first, ga_w_[2].second, 2, pc));
        t = conv2d(t, ga_w_[3].first, ga_w_[3].second, 2, pc);
        return t;
    }

    // y_hat (N,M,h,w) -> image (N,3,target_h,target_w); raw (unclamped) output
    Var synthesize(const Var& y_hat, int target_h, int target_w) const {
        const Padding p = padding_for(target_h, target_w);
        require(y_hat->value.h() == core_latent_extent(p.pad_h) &&
                    y_hat->value.w() == core_latent_extent(p.pad_w) &&
                    y_hat->value.c() == cfg_.latent_channels,
                ErrorKind::Shape, "synthesize: latent shape does not match target dims");
        const int pc = cfg_.core_kernel / 2;
        Var t = y_hat;
        t = relu(tconv2d(t, gs_w_[0].first, gs_w_[0].second, 2, pc, 1));
        t = relu(tconv2d(t, gs_w_[1].first, gs_w_[1].second, 2, pc, 1));
        t = relu(tconv2d(t, gs_w_[2].first, gs_w_[2].second, 2, pc, 1));
        t = tconv2d(t, gs_w_[3].first, gs_w_[3].second, 2, pc, 1);
        if (t->value.h() != target_h || t->value.w() != target_w)
            t = crop(t, 0, 0, target_h, target_w);
        return t;
    }

    // y (N,M,h,w) -> z (N,N,ceil(h/4),ceil(w/4))
    Var hyper_analyze(const Var& y) const {
        require(y->value.c() == cfg_.latent_channels, ErrorKind::Shape,
                "hyper_analyze: expected a core latent");
        Var t = y;
        t = relu(conv2d(t, ha_w_[0].first, ha_w_[0].second, 1, cfg_.hyper_head_kernel / 2));
        t = relu(conv2d(t, ha_w_[1].first, ha_w_[1].second, 2, cfg_.hyper_kernel / 2));
        t = conv2d(t, ha_w_[2].first, ha_w_[2].second, 2, cfg_.hyper_kernel / 2);
        return t;
    }

    // z_hat -> (mu, sigma), each with the core latent's shape (lat_h, lat_w).
    // The transposed convs produce ceil-multiples; output is cropped down.
    std::pair<Var, Var> hyper_synthesize(const Var& z_hat, int lat_h, int lat_w) const {
        require(z_hat->value.c() == cfg_.hyper_channels, ErrorKind::Shape,
                "hyper_synthesize: expected a hyper latent");
        require(hyper_latent_extent(lat_h) == z_hat->value.h() &&
                    hyper_latent_extent(lat_w) == z_hat->value.w(),
                ErrorKind::Shape, "hyper_synthesize: hyper latent does not match target latent dims");
        const int ph = cfg_.hyper_kernel / 2;
        Var t = z_hat;
        t = relu(tconv2d(t, hs_w_[0].first, hs_w_[0].second, 2, ph, 1));
        t = relu(tconv2d(t, hs_w_[1].first, hs_w_[1].second, 2, ph, 1));
        t = conv2d(t, hs_w_[2].first, hs_w_[2].second, 1, cfg_.hyper_head_kernel / 2);
        if (t->value.h() != lat_h || t->value.w() != lat_w) t = crop(t, 0, 0, lat_h, lat_w);
        const int M = cfg_.latent_channels;
        Var mu = slice_channels(t, 0, M);
        Var sigma = lower_bound(slice_channels(t, M, M), cfg_.sigma_min);
        return {mu, sigma};
    }

    // value-only conveniences
    Tensor analyze_t(const Tensor& x) const { return analyze(make_const(x))->value; }
    Tensor hyper_analyze_t(const Tensor& y) const { return hyper_analyze(make_const(y))->value; }
    std::pair<Tensor, Tensor> hyper_synthesize_t(const Tensor& z_hat, int lat_h, int lat_w) const {
        auto [m, s] = hyper_synthesize(make_const(z_hat), lat_h, lat_w);
        return {m->value, s->value};
    }
    Tensor synthesize_t(const Tensor& y_hat, int th, int tw) const {
        return synthesize(make_const(y_hat), th, tw)->value;
    }

private:
    using Layer = std::pair<Var, Var>;  // weight, bias

    Layer conv_param(const std::string& name, int co, int ci, int k, Rng& rng, double gain) {
        Tensor w(co, ci, k, k);
        const double std = std::sqrt(gain / (static_cast<double>(ci) * k * k));
        for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
        Var wv = params_.add(name + ".w", std::move(w));
        Var bv = params_.add(name + ".b", Tensor(1, co, 1, 1));
        return {wv, bv};
    }

    Layer tconv_param(const std::string& name, int ci, int co, int k, Rng& rng, double gain) {
        Tensor w(ci, co, k, k);
        const double std = std::sqrt(gain / (static_cast<double>(ci) * k * k));
        for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
        Var wv = params_.add(name + ".w", std::move(w));
        Var bv = params_.add(name + ".b", Tensor(1, co, 1, 1));
        return {wv, bv};
    }

    NetworkConfig cfg_;
    ParamStore params_;
    Layer ga_w_[4], gs_w_[4], ha_w_[3], hs_w_[3];
    FactorizedPrior prior_;
};

// Training-time quantization proxy (uniform noise, identity gradient) lives
// in nn_ops.hpp as add_uniform_noise. Inference quantization:

// round(v) or round(v - mu) + mu (mean-offset rounding). Residuals are
// integers; rounding is half-away-from-zero.
inline Tensor quantize_infer(const Tensor& v, const Tensor* means = nullptr) {
    if (means)
        require(v.same_shape(*means), ErrorKind::Shape, "quantize_infer: means shape mismatch");
    Tensor out = v;
    for (size_t i = 0; i < out.size(); ++i) {
        if (means) {
            const double mu = (*means)[i];
            out[i] = static_cast<double>(std::llround(out[i] - mu)) + mu;
        } else {
            out[i] = static_cast<double>(std::llround(out[i]));
        }
    }
    return out;
}

}  // namespace taskcodec
