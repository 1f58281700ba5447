#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "taskcodec/nn_ops.hpp"
#include "taskcodec/params.hpp"

namespace taskcodec {

using nlohmann::json;

// Small fully-convolutional segmentation network: three stride-2 stages,
// a middle block, three upsampling stages back to input resolution
// (~40k parameters). Stands in for the heavyweight analysis networks; the
// adapter interface is the same either way.
struct TaskNetConfig {
    int num_classes = 4;
    int width1 = 16;
    int width2 = 24;
    int width3 = 32;

    json to_json() const {
        return json{{"num_classes", num_classes},
                    {"width1", width1},
                    {"width2", width2},
                    {"width3", width3}};
    }
    static TaskNetConfig from_json(const json& j) {
        TaskNetConfig c;
        c.num_classes = j.at("num_classes").get<int>();
        c.width1 = j.value("width1", 16);
        c.width2 = j.value("width2", 24);
        c.width3 = j.value("width3", 32);
        return c;
    }
    bool operator==(const TaskNetConfig&) const = default;
};

class TaskNet {
public:
    TaskNet(TaskNetConfig cfg, uint64_t seed) : cfg_(cfg) {
        Rng rng(seed ^ 0x7A5CC0DEull);
        enc_[0] = conv_param("enc.0", cfg.width1, 3, 3, rng);
        enc_[1] = conv_param("enc.1", cfg.width2, cfg.width1, 3, rng);
        enc_[2] = conv_param("enc.2", cfg.width3, cfg.width2, 3, rng);
        mid_ = conv_param("mid", cfg.width3, cfg.width3, 3, rng);
        dec_[0] = tconv_param("dec.0", cfg.width3, cfg.width2, 4, rng);
        dec_[1] = tconv_param("dec.1", cfg.width2, cfg.width1, 4, rng);
        dec_[2] = tconv_param("dec.2", cfg.width1, cfg.num_classes, 4, rng);
    }

    const TaskNetConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    static const std::vector<std::string>& cut_points() {
        static const std::vector<std::string> pts = {"stage1", "stage2", "stage3", "logits"};
        return pts;
    }

    struct Activations {
        Var stage1, stage2, stage3, logits;
    };

    // Inputs of any size >= 16 are reflect-padded to a multiple of 8;
    // logits are cropped back to the input dims.
    Activations forward(const Var& x) const {
        require(x->value.c() == 3, ErrorKind::Shape, "task net expects RGB input");
        require(x->value.h() >= 16 && x->value.w() >= 16, ErrorKind::Shape,
                "incompatible-input-size: task net needs H,W >= 16");
        const int H = x->value.h(), W = x->value.w();
        const int ph = round_up(H, 8), pw = round_up(W, 8);
        Var t = x;
        if (ph != H || pw != W) t = reflect_pad(t, 0, ph - H, 0, pw - W);
        Activations a;
        a.stage1 = relu(conv2d(t, enc_[0].first, enc_[0].second, 2, 1));
        a.stage2 = relu(conv2d(a.stage1, enc_[1].first, enc_[1].second, 2, 1));
        a.stage3 = relu(conv2d(a.stage2, enc_[2].first, enc_[2].second, 2, 1));
        Var m = relu(conv2d(a.stage3, mid_.first, mid_.second, 1, 1));
        Var u = relu(tconv2d(m, dec_[0].first, dec_[0].second, 2, 1, 0));
        u = relu(tconv2d(u, dec_[1].first, dec_[1].second, 2, 1, 0));
        Var logits = tconv2d(u, dec_[2].first, dec_[2].second, 2, 1, 0);
        if (ph != H || pw != W) logits = crop(logits, 0, 0, H, W);
        a.logits = logits;
        return a;
    }

    Var feature_at(const Var& x, const std::string& cut_point) const {
        Activations a = forward(x);
        if (cut_point == "stage1") return a.stage1;
        if (cut_point == "stage2") return a.stage2;
        if (cut_point == "stage3") return a.stage3;
        if (cut_point == "logits") return a.logits;
        fail(ErrorKind::Config, "unknown-cut-point: " + cut_point);
    }

private:
    using Layer = std::pair<Var, Var>;

    Layer conv_param(const std::string& name, int co, int ci, int k, Rng& rng) {
        Tensor w(co, ci, k, k);
        const double std = std::sqrt(2.0 / (static_cast<double>(ci) * k * k));
        for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
        return {params_.add(name + ".w", std::move(w)), params_.add(name + ".b", Tensor(1, co, 1, 1))};
    }
    Layer tconv_param(const std::string& name, int ci, int co, int k, Rng& rng) {
        Tensor w(ci, co, k, k);
        const double std = std::sqrt(2.0 / (static_cast<double>(ci) * k * k));
        for (size_t i = 0; i < w.size(); ++i) w[i] = rng.normal() * std;
        return {params_.add(name + ".w", std::move(w)), params_.add(name + ".b", Tensor(1, co, 1, 1))};
    }

    TaskNetConfig cfg_;
    ParamStore params_;
    Layer enc_[3], mid_, dec_[3];
};

}  // namespace taskcodec
