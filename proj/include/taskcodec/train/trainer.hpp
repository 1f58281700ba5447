#pragma once

#include <fstream>
#include <numeric>
#include <optional>

#include "taskcodec/checkpoint.hpp"
#include "taskcodec/codec/model.hpp"
#include "taskcodec/entropy/rate.hpp"
#include "taskcodec/train/optimizer.hpp"
#include "taskcodec/train/strategies.hpp"

namespace taskcodec {

struct TrainingConfig {
    Strategy strategy = Strategy::mse;
    double lambda = 128.0;
    std::vector<double> lambda_ladder;  // finetune: one model per entry
    int pretrain_iterations = 500;
    int finetune_epochs = 10;
    int batch_size = 4;
    int crop_size = 64;
    double learning_rate = 1e-4;
    uint64_t seed = 1234;
    FrameMode frame_mode = FrameMode::labeled_only;
    int checkpoint_interval = 250;
    std::string cut_point = "stage3";
    double confidence_threshold = 0.5;

    json to_json() const {
        return json{{"strategy", taskcodec::to_string(strategy)},
                    {"lambda", lambda},
                    {"lambda_ladder", lambda_ladder},
                    {"pretrain_iterations", pretrain_iterations},
                    {"finetune_epochs", finetune_epochs},
                    {"batch_size", batch_size},
                    {"crop_size", crop_size},
                    {"learning_rate", learning_rate},
                    {"seed", seed},
                    {"frame_mode", taskcodec::to_string(frame_mode)},
                    {"checkpoint_interval", checkpoint_interval},
                    {"cut_point", cut_point},
                    {"confidence_threshold", confidence_threshold}};
    }

    static TrainingConfig from_json(const json& j) {
        TrainingConfig c;
        c.strategy = strategy_from_string(j.value("strategy", "mse"));
        c.lambda = j.value("lambda", 128.0);
        c.lambda_ladder = j.value("lambda_ladder", std::vector<double>{});
        c.pretrain_iterations = j.value("pretrain_iterations", 500);
        c.finetune_epochs = j.value("finetune_epochs", 10);
        c.batch_size = j.value("batch_size", 4);
        c.crop_size = j.value("crop_size", 64);
        c.learning_rate = j.value("learning_rate", 1e-4);
        c.seed = j.value("seed", static_cast<uint64_t>(1234));
        c.frame_mode = frame_mode_from_string(j.value("frame_mode", "labeled_only"));
        c.checkpoint_interval = j.value("checkpoint_interval", 250);
        c.cut_point = j.value("cut_point", "stage3");
        c.confidence_threshold = j.value("confidence_threshold", 0.5);
        return c;
    }
};

struct StepRecord {
    int step;
    double rate_bpp, distortion, total, lambda;
    Strategy strategy;

    json to_json() const {
        return json{{"step", step},       {"rate_bpp", rate_bpp}, {"distortion", distortion},
                    {"total", total},     {"lambda", lambda},     {"strategy", taskcodec::to_string(strategy)}};
    }
};

struct TrainResult {
    fs::path checkpoint_path;
    std::vector<StepRecord> history;
    double lambda = 0.0;
    int iterations = 0;
};

namespace detail {

struct TrainBatch {
    Tensor images;                      // (B,3,c,c)
    std::vector<Annotations> annotations;  // only populated for gt
};

// Samples one frame per listed sequence, applies a shared-size random crop,
// and (for gt only) crops the label maps identically.
inline TrainBatch assemble_batch(const SequenceDataset& ds, const std::vector<size_t>& seqs,
                                 Rng& rng, int crop, FrameMode mode, bool with_annotations) {
    const int B = static_cast<int>(seqs.size());
    TrainBatch batch;
    batch.images = Tensor(B, 3, crop, crop);
    for (int b = 0; b < B; ++b) {
        const size_t s = seqs[static_cast<size_t>(b)];
        const int f = with_annotations ? ds.seq(s).labeled_index
                                       : sample_training_frame_index(ds.seq(s), rng, mode);
        auto img = ds.frame(s, f);
        require(img->h() >= crop && img->w() >= crop, ErrorKind::Data,
                "frame smaller than the crop size");
        const int oy = img->h() > crop ? rng.uniform_int(img->h() - crop + 1) : 0;
        const int ox = img->w() > crop ? rng.uniform_int(img->w() - crop + 1) : 0;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < crop; ++y)
                for (int x = 0; x < crop; ++x)
                    batch.images.at(b, c, y, x) = img->at(0, c, oy + y, ox + x);
        if (with_annotations) {
            auto lm = ds.labels(s);
            LabelMap cropped(crop, crop);
            for (int y = 0; y < crop; ++y)
                for (int x = 0; x < crop; ++x) cropped.at(y, x) = lm->at(oy + y, ox + x);
            batch.annotations.push_back(Annotations::from_labels(std::move(cropped)));
        }
    }
    return batch;
}

struct StepOutcome {
    RDLossBreakdown breakdown;
    Var total;
};

// One forward pass of Eq.-1 style training: noisy quantization proxies for
// both latents, rate in bpp over both streams, distortion per strategy.
inline StepOutcome build_loss(const CodecModel& model, const TrainBatch& batch,
                              const TrainingConfig& cfg, const FrozenNetworkHandle* task,
                              Rng& noise_rng) {
    Var x = make_const(batch.images);
    Var y = model.analyze(x);
    Var y_noisy = add_uniform_noise(y, noise_rng);
    Var z = model.hyper_analyze(y);
    Var z_noisy = add_uniform_noise(z, noise_rng);
    auto [mu, sigma] = model.hyper_synthesize(z_noisy, y->value.h(), y->value.w());
    Var bits = add(laplace_rate_bits(y_noisy, mu, sigma), factorized_rate_bits(z_noisy, model.prior()));
    const double pixels = static_cast<double>(batch.images.n()) * batch.images.h() * batch.images.w();
    Var rate_bpp = scale(bits, 1.0 / pixels);
    Var x_hat = model.synthesize(y_noisy, batch.images.h(), batch.images.w());

    Var distortion;
    switch (cfg.strategy) {
        case Strategy::mse:
            distortion = distortion_mse(x_hat, x);
            break;
        case Strategy::gt:
            require(task, ErrorKind::Config, "gt strategy needs a task network");
            distortion = distortion_gt(x_hat, batch.annotations, *task);
            break;
        case Strategy::feature:
            require(task, ErrorKind::Config, "feature strategy needs a task network");
            distortion = distortion_feature(x_hat, x, *task, cfg.cut_point);
            break;
        case Strategy::pseudo_gt:
            require(task, ErrorKind::Config, "pseudo_gt strategy needs a task network");
            distortion = distortion_pseudo_gt(x_hat, x, *task, cfg.confidence_threshold);
            break;
    }

    StepOutcome out;
    out.total = add(rate_bpp, scale(distortion, cfg.lambda));
    out.breakdown = rd_loss(rate_bpp->value[0], distortion->value[0], cfg.lambda, cfg.strategy);
    return out;
}

class StepLogger {
public:
    explicit StepLogger(const std::optional<fs::path>& path) {
        if (path) {
            fs::create_directories(path->parent_path());
            out_.open(*path, std::ios::trunc);
            require(out_.good(), ErrorKind::Data, "cannot open training log: " + path->string());
        }
    }
    void log(const StepRecord& r) {
        if (out_.is_open()) out_ << r.to_json().dump() << "\n";
    }
    void flush() {
        if (out_.is_open()) out_.flush();
    }

private:
    std::ofstream out_;
};

}  // namespace detail

inline json codec_checkpoint_meta(const CodecModel& model, const TrainingConfig& cfg,
                                  int iteration, double lambda) {
    return json{{"network_config", model.config().to_json()},
                {"training_config", cfg.to_json()},
                {"iteration", iteration},
                {"lambda", lambda},
                {"strategy", to_string(cfg.strategy)},
                {"tool_version", kToolVersion}};
}

inline void save_codec_checkpoint(const fs::path& path, const CodecModel& model,
                                  const TrainingConfig& cfg, int iteration, double lambda) {
    save_checkpoint(path, CheckpointKind::Codec, codec_checkpoint_meta(model, cfg, iteration, lambda),
                    model.params());
}

inline CodecModel load_codec_checkpoint(const fs::path& path, json* meta_out = nullptr) {
    LoadedCheckpoint ck = load_checkpoint(path);
    require(ck.kind == CheckpointKind::Codec, ErrorKind::Data,
            "checkpoint is not a codec model: " + path.string());
    CodecModel model(NetworkConfig::from_json(ck.meta.at("network_config")), 0);
    restore_params(model.params(), ck);
    if (meta_out) *meta_out = ck.meta;
    return model;
}

// MSE pretraining for exactly cfg.pretrain_iterations optimizer steps.
inline TrainResult pretrain(CodecModel& model, const SequenceDataset& ds, TrainingConfig cfg,
                            const std::optional<fs::path>& out_dir) {
    require(cfg.strategy == Strategy::mse, ErrorKind::Config, "pretrain runs the mse strategy");
    require(!ds.empty(), ErrorKind::Data, "dataset is empty");
    require(cfg.pretrain_iterations > 0, ErrorKind::Config, "pretrain_iterations must be > 0");

    Rng rng(cfg.seed);
    Adam opt(model.params().vars(), cfg.learning_rate);
    detail::StepLogger logger(out_dir ? std::optional<fs::path>(*out_dir / "pretrain_log.jsonl")
                                      : std::nullopt);

    TrainResult res;
    std::vector<size_t> order(ds.size());
    std::iota(order.begin(), order.end(), size_t{0});
    size_t cursor = order.size();  // trigger shuffle on first use

    for (int it = 1; it <= cfg.pretrain_iterations; ++it) {
        std::vector<size_t> chunk;
        for (int b = 0; b < cfg.batch_size; ++b) {
            if (cursor >= order.size()) {
                rng.shuffle(order);
                cursor = 0;
            }
            chunk.push_back(order[cursor++]);
        }
        auto batch = detail::assemble_batch(ds, chunk, rng, cfg.crop_size, cfg.frame_mode, false);
        auto outcome = detail::build_loss(model, batch, cfg, nullptr, rng);
        model.params().zero_grads();
        backward(outcome.total);
        opt.step();

        StepRecord rec{it, outcome.breakdown.rate_bpp, outcome.breakdown.distortion,
                       outcome.breakdown.total, cfg.lambda, cfg.strategy};
        res.history.push_back(rec);
        logger.log(rec);
        if (out_dir && cfg.checkpoint_interval > 0 && it % cfg.checkpoint_interval == 0 &&
            it != cfg.pretrain_iterations) {
            save_codec_checkpoint(*out_dir / ("pretrain_it" + std::to_string(it) + ".ckpt"), model,
                                  cfg, it, cfg.lambda);
            logger.flush();
        }
    }
    res.iterations = cfg.pretrain_iterations;
    res.lambda = cfg.lambda;
    if (out_dir) {
        res.checkpoint_path = *out_dir / "pretrain.ckpt";
        save_codec_checkpoint(res.checkpoint_path, model, cfg, cfg.pretrain_iterations, cfg.lambda);
    }
    return res;
}

namespace detail {
inline std::string lambda_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
}  // namespace detail

// Task finetuning: one model per ladder entry, each trained for
// finetune_epochs passes over the sequences (one sampled frame each).
// The task network is verified frozen before and after every run.
inline std::vector<TrainResult> finetune(const CodecModel& pretrained, const SequenceDataset& ds,
                                         const FrozenNetworkHandle& task, TrainingConfig cfg,
                                         const std::optional<fs::path>& out_dir) {
    require(cfg.strategy == Strategy::gt || cfg.strategy == Strategy::feature ||
                cfg.strategy == Strategy::pseudo_gt,
            ErrorKind::Config, "finetune strategy must be gt, feature, or pseudo_gt");
    require(!ds.empty(), ErrorKind::Data, "dataset is empty");
    if (cfg.strategy == Strategy::gt) {
        require(cfg.frame_mode == FrameMode::labeled_only, ErrorKind::Config,
                "gt strategy trains on labeled frames only");
        require(ds.annotations_available(), ErrorKind::Data,
                "missing-annotation: gt strategy needs an annotated dataset");
    }
    std::vector<double> ladder = cfg.lambda_ladder;
    if (ladder.empty()) ladder.push_back(cfg.lambda);

    std::vector<TrainResult> results;
    for (double lambda : ladder) {
        require(lambda > 0.0, ErrorKind::Config, "non-positive-lambda in ladder");
        require(assert_frozen(task), ErrorKind::FrozenViolation,
                "frozen-violation: task network changed before finetuning");
        CodecModel model = pretrained.clone();
        TrainingConfig run_cfg = cfg;
        run_cfg.lambda = lambda;
        Rng rng(cfg.seed ^ fnv1a64(detail::lambda_tag(lambda)));
        Adam opt(model.params().vars(), cfg.learning_rate);

        const std::string tag = to_string(cfg.strategy) + "_lambda" + detail::lambda_tag(lambda) +
                                (cfg.frame_mode == FrameMode::random_frame ? "_rf" : "");
        detail::StepLogger logger(out_dir ? std::optional<fs::path>(*out_dir / (tag + "_log.jsonl"))
                                          : std::nullopt);

        TrainResult res;
        res.lambda = lambda;
        std::vector<size_t> order(ds.size());
        std::iota(order.begin(), order.end(), size_t{0});
        int step = 0;
        for (int epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
            rng.shuffle(order);
            for (size_t pos = 0; pos < order.size(); pos += static_cast<size_t>(cfg.batch_size)) {
                const size_t chunk_end =
                    std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
                std::vector<size_t> chunk(order.begin() + static_cast<long>(pos),
                                          order.begin() + static_cast<long>(chunk_end));
                auto batch = detail::assemble_batch(ds, chunk, rng, cfg.crop_size, cfg.frame_mode,
                                                    cfg.strategy == Strategy::gt);
                auto outcome = detail::build_loss(model, batch, run_cfg, &task, rng);
                model.params().zero_grads();
                backward(outcome.total);
                opt.step();
                ++step;
                StepRecord rec{step, outcome.breakdown.rate_bpp, outcome.breakdown.distortion,
                               outcome.breakdown.total, lambda, cfg.strategy};
                res.history.push_back(rec);
                logger.log(rec);
            }
            require(assert_frozen(task), ErrorKind::FrozenViolation,
                    "frozen-violation: task network changed during finetuning");
            logger.flush();
        }
        res.iterations = step;
        if (out_dir) {
            res.checkpoint_path = *out_dir / (tag + ".ckpt");
            save_codec_checkpoint(res.checkpoint_path, model, run_cfg, step, lambda);
        }
        require(assert_frozen(task), ErrorKind::FrozenViolation,
                "frozen-violation: task network changed after finetuning");
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace taskcodec
