#pragma once

#include "taskcodec/task/adapter.hpp"
#include "taskcodec/train/optimizer.hpp"
#include "taskcodec/train/sampler.hpp"

namespace taskcodec {

// Trains the bundled fully-convolutional segmentation fixture on a shapes
// dataset (labeled frames, pixel cross-entropy). Deterministic for a fixed
// seed; cache the checkpoint and reload rather than retraining.
struct TaskTrainConfig {
    TaskNetConfig net;
    int epochs = 40;
    int batch_size = 4;
    double learning_rate = 1e-3;
    uint64_t seed = 4321;

    json to_json() const {
        return json{{"net", net.to_json()},
                    {"epochs", epochs},
                    {"batch_size", batch_size},
                    {"learning_rate", learning_rate},
                    {"seed", seed}};
    }
};

inline TaskNet train_task_net(const SequenceDataset& ds, const TaskTrainConfig& cfg,
                              std::vector<double>* loss_history = nullptr) {
    require(!ds.empty(), ErrorKind::Data, "task training dataset is empty");
    TaskNet net(cfg.net, cfg.seed);
    Adam opt(net.params().vars(), cfg.learning_rate);
    Rng rng(cfg.seed ^ 0xF1C5);

    std::vector<size_t> order(ds.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t pos = 0; pos < order.size(); pos += static_cast<size_t>(cfg.batch_size)) {
            const size_t end = std::min(order.size(), pos + static_cast<size_t>(cfg.batch_size));
            const int B = static_cast<int>(end - pos);
            auto first = ds.frame(order[pos], ds.seq(order[pos]).labeled_index);
            Tensor images(B, 3, first->h(), first->w());
            std::vector<LabelMap> labels;
            for (int b = 0; b < B; ++b) {
                const size_t s = order[pos + static_cast<size_t>(b)];
                auto img = ds.frame(s, ds.seq(s).labeled_index);
                for (int c = 0; c < 3; ++c)
                    for (int y = 0; y < img->h(); ++y)
                        for (int x = 0; x < img->w(); ++x)
                            images.at(b, c, y, x) = img->at(0, c, y, x);
                labels.push_back(*ds.labels(s));
            }
            Var logits = net.forward(make_const(images)).logits;
            Var loss = softmax_cross_entropy(logits, labels);
            net.params().zero_grads();
            backward(loss);
            opt.step();
            if (loss_history) loss_history->push_back(loss->value[0]);
        }
    }
    return net;
}

// Scales the classifier head so the softmax saturates: predictions keep the
// same argmax but become (near-)one-hot. Used to build the maximally
// confident variant for self-consistency checks.
inline void sharpen_logits(TaskNet& net, double factor) {
    for (const char* name : {"dec.2.w", "dec.2.b"}) {
        Var v = net.params().find(name);
        require(static_cast<bool>(v), ErrorKind::Internal, "task net missing classifier head");
        for (size_t i = 0; i < v->value.size(); ++i) v->value[i] *= factor;
    }
}

// Train-or-load wrapper around the fixture checkpoint.
inline FrozenNetworkHandle fixture_task_net(const fs::path& cache_path, const ShapesConfig& data_cfg,
                                            const TaskTrainConfig& train_cfg = {}) {
    if (!fs::exists(cache_path)) {
        SequenceDataset ds = generate_shapes_dataset(data_cfg);
        TaskNet net = train_task_net(ds, train_cfg);
        json meta;
        meta["fixture"] = json{{"shapes_seed", data_cfg.seed},
                               {"sequences", data_cfg.sequences},
                               {"train", train_cfg.to_json()}};
        save_task_net(cache_path, net, meta);
    }
    return load_task_net(cache_path);
}

}  // namespace taskcodec
