#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "taskcodec/task/annotations.hpp"

namespace taskcodec {

// Per-class intersection/union tallies, accumulated over any number of
// images before the final mean. mIoU averages the classes present in the
// ground truth; ignore-index pixels never count.
struct IouAccumulator {
    struct Tally {
        long inter = 0, uni = 0, gt = 0;
    };
    std::vector<Tally> tally;
    long valid_pixels = 0;

    explicit IouAccumulator(int num_classes) : tally(static_cast<size_t>(num_classes)) {}

    void add(const LabelMap& pred, const LabelMap& gt, int32_t ignore = kIgnoreLabel) {
        require(pred.same_shape(gt), ErrorKind::Shape, "miou: label map shape mismatch");
        const int num_classes = static_cast<int>(tally.size());
        for (size_t i = 0; i < gt.data.size(); ++i) {
            const int32_t g = gt.data[i];
            if (g == ignore) continue;
            require(g >= 0 && g < num_classes, ErrorKind::Data, "miou: gt label out of range");
            const int32_t p = pred.data[i];
            require(p >= 0 && p < num_classes, ErrorKind::Data, "miou: pred label out of range");
            ++valid_pixels;
            auto& tg = tally[static_cast<size_t>(g)];
            ++tg.gt;
            if (p == g) {
                ++tg.inter;
                ++tg.uni;
            } else {
                ++tg.uni;
                ++tally[static_cast<size_t>(p)].uni;
            }
        }
    }

    double miou() const {
        require(valid_pixels > 0, ErrorKind::Data, "miou: no valid pixels");
        double acc = 0.0;
        int present = 0;
        for (const auto& t : tally) {
            if (t.gt == 0) continue;  // class absent from GT: excluded
            ++present;
            acc += t.uni > 0 ? static_cast<double>(t.inter) / static_cast<double>(t.uni) : 1.0;
        }
        require(present > 0, ErrorKind::Data, "miou: no classes present in GT");
        return acc / static_cast<double>(present);
    }
};

inline double miou(const LabelMap& pred, const LabelMap& gt, int num_classes,
                   int32_t ignore = kIgnoreLabel) {
    IouAccumulator acc(num_classes);
    acc.add(pred, gt, ignore);
    return acc.miou();
}

namespace detail {

// Average precision for one class at one IoU threshold: detections pooled
// across images, sorted by confidence, greedily matched to the best still
// unmatched ground truth of the same image; area under the
// precision-envelope / recall curve.
inline double average_precision(std::vector<const Instance*> dets,
                                const std::vector<const Instance*>& gts, double iou_thr) {
    if (gts.empty()) return 0.0;
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Instance* a, const Instance* b) { return a->score > b->score; });
    std::vector<bool> gt_used(gts.size(), false);
    std::vector<int> is_tp(dets.size(), 0);
    for (size_t d = 0; d < dets.size(); ++d) {
        double best = iou_thr;
        int best_g = -1;
        for (size_t g = 0; g < gts.size(); ++g) {
            if (gt_used[g] || gts[g]->image_id != dets[d]->image_id) continue;
            const double ov = dets[d]->iou(*gts[g]);
            if (ov >= best) {
                best = ov;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0) {
            gt_used[static_cast<size_t>(best_g)] = true;
            is_tp[d] = 1;
        }
    }
    // precision envelope over recall
    std::vector<double> precision, recall;
    int tp = 0;
    for (size_t d = 0; d < dets.size(); ++d) {
        tp += is_tp[d];
        precision.push_back(static_cast<double>(tp) / static_cast<double>(d + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
    }
    double ap = 0.0, prev_r = 0.0;
    for (size_t d = 0; d < dets.size(); ++d) {
        double pmax = 0.0;
        for (size_t k = d; k < dets.size(); ++k) pmax = std::max(pmax, precision[k]);
        ap += pmax * (recall[d] - prev_r);
        prev_r = recall[d];
    }
    return ap;
}

}  // namespace detail

// Per-class AP averaged over IoU thresholds 0.50:0.05:0.95 (standard
// detection protocol).
inline double class_ap(const std::vector<Instance>& preds, const std::vector<Instance>& gts,
                       int class_id) {
    std::vector<const Instance*> d, g;
    for (const auto& p : preds)
        if (p.class_id == class_id) d.push_back(&p);
    for (const auto& t : gts)
        if (t.class_id == class_id) g.push_back(&t);
    double acc = 0.0;
    int count = 0;
    for (double thr = 0.50; thr < 0.96; thr += 0.05) {
        acc += detail::average_precision(d, g, thr);
        ++count;
    }
    return acc / static_cast<double>(count);
}

// Weighted average precision: per-class AP weighted by the class's
// ground-truth instance count (or by explicit weights). With uniform
// weights this reduces to mAP.
inline double wap(const std::vector<Instance>& preds, const std::vector<Instance>& gts,
                  const std::map<int, double>* class_weights = nullptr) {
    require(!gts.empty(), ErrorKind::Data, "wap: empty ground truth");
    std::map<int, long> gt_counts;
    for (const auto& t : gts) ++gt_counts[t.class_id];
    double num = 0.0, den = 0.0;
    for (const auto& [cls, count] : gt_counts) {
        double w = static_cast<double>(count);
        if (class_weights) {
            const auto it = class_weights->find(cls);
            w = it != class_weights->end() ? it->second : 0.0;
        }
        if (w <= 0.0) continue;
        num += w * class_ap(preds, gts, cls);
        den += w;
    }
    require(den > 0.0, ErrorKind::Data, "wap: all class weights are zero");
    return num / den;
}

}  // namespace taskcodec
