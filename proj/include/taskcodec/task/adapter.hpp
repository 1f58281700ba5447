#pragma once

#include <filesystem>
#include <memory>

#include "taskcodec/checkpoint.hpp"
#include "taskcodec/task/annotations.hpp"
#include "taskcodec/task/task_net.hpp"

namespace taskcodec {

// Raw task-network output. For the bundled semantic net this is a logits
// map on the tape (differentiable w.r.t. the input image); instance lists
// appear only on the evaluation path.
struct TaskPredictions {
    Var scores;  // (N,C,H,W) semantic logits, or null for instance predictions
    std::optional<std::vector<RawInstance>> instances;

    bool is_semantic() const { return static_cast<bool>(scores); }
};

// Frozen analysis network: weights never update; the fingerprint taken at
// load time is the freeze witness. Gradients still flow through the
// activations into whatever feeds the network.
class FrozenNetworkHandle {
public:
    FrozenNetworkHandle(TaskNet net, std::string source)
        : net_(std::move(net)), source_(std::move(source)) {
        net_.params().set_requires_grad(false);
        fingerprint_ = net_.params().fingerprint();
    }

    const TaskNet& net() const { return net_; }
    uint64_t fingerprint() const { return fingerprint_; }
    const std::string& source() const { return source_; }
    int num_classes() const { return net_.config().num_classes; }

private:
    TaskNet net_;
    std::string source_;
    uint64_t fingerprint_;
};

inline FrozenNetworkHandle load_task_net(const std::filesystem::path& path) {
    LoadedCheckpoint ck = load_checkpoint(path);
    require(ck.kind == CheckpointKind::TaskNet, ErrorKind::Data,
            "checkpoint is not a task network: " + path.string());
    TaskNet net(TaskNetConfig::from_json(ck.meta.at("task_config")), 0);
    restore_params(net.params(), ck);
    return FrozenNetworkHandle(std::move(net), path.string());
}

inline void save_task_net(const std::filesystem::path& path, const TaskNet& net,
                          const json& extra_meta = json::object()) {
    json meta = extra_meta;
    meta["task_config"] = net.config().to_json();
    save_checkpoint(path, CheckpointKind::TaskNet, meta, net.params());
}

// T(x): deterministic inference (the net has no stochastic layers), with
// gradients flowing back to x when x is on the tape.
inline TaskPredictions predict(const Var& x, const FrozenNetworkHandle& net) {
    require(x->value.all_finite(), ErrorKind::Shape, "predict: non-finite input");
    TaskPredictions p;
    p.scores = net.net().forward(x).logits;
    return p;
}

inline TaskPredictions predict(const Tensor& x, const FrozenNetworkHandle& net) {
    return predict(make_const(x), net);
}

// psi = f_B(x) at a registered backbone cut point.
inline Var extract_features(const Var& x, const FrozenNetworkHandle& net,
                            const std::string& cut_point) {
    return net.net().feature_at(x, cut_point);
}

// Hardens raw predictions into the annotation schema: per-pixel argmax for
// semantic maps (ties to the lowest class index); instances filtered by
// confidence and masks binarized at 0.5. Output carries pseudo provenance.
inline Annotations harden_predictions(const TaskPredictions& p, double confidence_threshold = 0.5) {
    if (p.is_semantic()) {
        return Annotations::from_labels(argmax_channels(p.scores->value), Provenance::pseudo);
    }
    require(p.instances.has_value(), ErrorKind::Data, "harden: empty predictions");
    std::vector<Instance> out;
    for (const RawInstance& ri : *p.instances) {
        if (ri.score < confidence_threshold) continue;
        Instance inst;
        inst.image_id = ri.image_id;
        inst.class_id = ri.class_id;
        inst.score = ri.score;
        inst.box = ri.box;
        inst.mask.h = ri.mask_h;
        inst.mask.w = ri.mask_w;
        inst.mask.data.resize(ri.soft_mask.size());
        for (size_t i = 0; i < ri.soft_mask.size(); ++i)
            inst.mask.data[i] = ri.soft_mask[i] >= 0.5 ? 1 : 0;
        out.push_back(std::move(inst));
    }
    return Annotations::from_instances(std::move(out), Provenance::pseudo);
}

// L_TASK: the loss the analysis network was trained with — pixel
// cross-entropy for the semantic schema. Identical formula regardless of
// the annotation provenance. Instance-schema losses belong to the
// full-scale detectors and are out of scope here.
inline Var task_loss(const TaskPredictions& p, const Annotations& ann) {
    if (p.is_semantic()) {
        require(ann.semantic.has_value(), ErrorKind::Data,
                "schema-mismatch: semantic predictions need a label-map annotation");
        const int n = p.scores->value.n();
        std::vector<LabelMap> labels(static_cast<size_t>(n), *ann.semantic);
        return softmax_cross_entropy(p.scores, labels);
    }
    fail(ErrorKind::Data, "schema-mismatch: instance task loss is not supported by the bundled net");
}

// Variant for batches with per-image annotations.
inline Var task_loss(const TaskPredictions& p, const std::vector<Annotations>& anns) {
    require(p.is_semantic(), ErrorKind::Data, "schema-mismatch: batched loss needs semantic schema");
    std::vector<LabelMap> labels;
    labels.reserve(anns.size());
    for (const auto& a : anns) {
        require(a.semantic.has_value(), ErrorKind::Data,
                "schema-mismatch: semantic predictions need a label-map annotation");
        labels.push_back(*a.semantic);
    }
    return softmax_cross_entropy(p.scores, labels);
}

// true iff the live weights still hash to the fingerprint recorded at load
inline bool assert_frozen(const FrozenNetworkHandle& net) {
    return net.net().params().fingerprint() == net.fingerprint();
}

}  // namespace taskcodec
