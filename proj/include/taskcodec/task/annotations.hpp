#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "taskcodec/tensor.hpp"

namespace taskcodec {

enum class Provenance { ground_truth, pseudo };

struct Box {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }

    double iou(const Box& o) const {
        const double ix0 = std::max(x0, o.x0), iy0 = std::max(y0, o.y0);
        const double ix1 = std::min(x1, o.x1), iy1 = std::min(y1, o.y1);
        const double inter = std::max(0.0, ix1 - ix0) * std::max(0.0, iy1 - iy0);
        const double uni = area() + o.area() - inter;
        return uni > 0.0 ? inter / uni : 0.0;
    }
};

struct Mask {
    int h = 0, w = 0;
    std::vector<uint8_t> data;  // binary

    bool empty() const { return data.empty(); }

    double iou(const Mask& o) const {
        if (empty() || o.empty() || h != o.h || w != o.w) return 0.0;
        long inter = 0, uni = 0;
        for (size_t i = 0; i < data.size(); ++i) {
            const bool a = data[i] != 0, b = o.data[i] != 0;
            inter += (a && b);
            uni += (a || b);
        }
        return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
    }
};

// Hardened instance (annotation form): hard class, binary mask.
struct Instance {
    int image_id = 0;
    int class_id = 0;
    double score = 1.0;  // detection confidence; 1.0 for ground truth
    Box box;
    Mask mask;

    // mask IoU when both sides carry masks, box IoU otherwise
    double iou(const Instance& o) const {
        if (!mask.empty() && !o.mask.empty()) return mask.iou(o.mask);
        return box.iou(o.box);
    }
};

// Raw (differentiable-form) instance prediction: soft mask, confidence.
struct RawInstance {
    int image_id = 0;
    int class_id = 0;
    double score = 0.0;
    Box box;
    int mask_h = 0, mask_w = 0;
    std::vector<double> soft_mask;  // values in [0,1]
};

// Annotation container: either a semantic label map or an instance list,
// with a provenance flag. Pseudo annotations are structurally identical to
// ground truth; every consumer treats them the same.
struct Annotations {
    Provenance provenance = Provenance::ground_truth;
    std::optional<LabelMap> semantic;
    std::optional<std::vector<Instance>> instances;

    static Annotations from_labels(LabelMap m, Provenance p = Provenance::ground_truth) {
        Annotations a;
        a.provenance = p;
        a.semantic = std::move(m);
        return a;
    }

    static Annotations from_instances(std::vector<Instance> v,
                                      Provenance p = Provenance::ground_truth) {
        Annotations a;
        a.provenance = p;
        a.instances = std::move(v);
        return a;
    }
};

}  // namespace taskcodec
