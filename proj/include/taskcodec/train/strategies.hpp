#pragma once

#include "taskcodec/task/adapter.hpp"
#include "taskcodec/train/sampler.hpp"

namespace taskcodec {

// The four distortion regimes: plain MSE for pretraining, then the task
// loss against ground truth, the backbone feature SSE, or the task loss
// against hardened predictions on the uncompressed image (pseudo ground
// truth — no annotations touched anywhere on that path).
enum class Strategy { mse, gt, feature, pseudo_gt };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::mse: return "mse";
        case Strategy::gt: return "gt";
        case Strategy::feature: return "feature";
        case Strategy::pseudo_gt: return "pseudo_gt";
    }
    return "?";
}
inline Strategy strategy_from_string(const std::string& s) {
    if (s == "mse") return Strategy::mse;
    if (s == "gt") return Strategy::gt;
    if (s == "feature") return Strategy::feature;
    if (s == "pseudo_gt") return Strategy::pseudo_gt;
    fail(ErrorKind::Config, "unknown strategy: " + s);
}

struct RDLossBreakdown {
    double rate_bpp = 0.0;
    double distortion = 0.0;
    double total = 0.0;
    double lambda = 0.0;
    Strategy strategy = Strategy::mse;
};

// total = rate + lambda * distortion (exact arithmetic identity)
inline RDLossBreakdown rd_loss(double rate, double distortion, double lambda,
                               Strategy strategy = Strategy::mse) {
    require(lambda > 0.0, ErrorKind::Config, "non-positive-lambda: lambda must be > 0");
    RDLossBreakdown b;
    b.rate_bpp = rate;
    b.distortion = distortion;
    b.lambda = lambda;
    b.strategy = strategy;
    b.total = rate + lambda * distortion;
    return b;
}

// D = mean squared error over all pixels and channels
inline Var distortion_mse(const Var& x_hat, const Var& x) {
    require(x_hat->value.same_shape(x->value), ErrorKind::Shape, "distortion_mse: shape mismatch");
    return mse(x_hat, x);
}

// D_G = L_TASK(T(x_hat), annotations). Accepts ground-truth or pseudo
// provenance (the loss is provenance-blind); only presence is required.
inline Var distortion_gt(const Var& x_hat, const std::vector<Annotations>& anns,
                         const FrozenNetworkHandle& net) {
    require(!anns.empty(), ErrorKind::Data, "missing-annotation: no annotations supplied");
    for (const auto& a : anns)
        require(a.semantic.has_value() || a.instances.has_value(), ErrorKind::Data,
                "missing-annotation: empty annotation record");
    TaskPredictions p = predict(x_hat, net);
    return task_loss(p, anns);
}

inline Var distortion_gt(const Var& x_hat, const Annotations& ann, const FrozenNetworkHandle& net) {
    return distortion_gt(x_hat, std::vector<Annotations>{ann}, net);
}

// D_F = sum (psi_hat - psi)^2; the target branch runs detached, so no
// gradient ever reaches x.
inline Var distortion_feature(const Var& x_hat, const Var& x, const FrozenNetworkHandle& net,
                              const std::string& cut_point) {
    require(x_hat->value.same_shape(x->value), ErrorKind::Shape,
            "distortion_feature: shape mismatch");
    Var psi_hat = extract_features(x_hat, net, cut_point);
    Var psi = extract_features(detach(x), net, cut_point);
    return sse(psi_hat, detach(psi));
}

// D_P = L_TASK(T(x_hat), harden(T(x))): literally the ground-truth path fed
// with substituted labels. Needs zero annotation inputs; the pseudo-label
// branch is integer-hardened, so it cannot carry gradients by construction.
inline Var distortion_pseudo_gt(const Var& x_hat, const Var& x, const FrozenNetworkHandle& net,
                                double confidence_threshold = 0.5) {
    require(x_hat->value.same_shape(x->value), ErrorKind::Shape,
            "distortion_pseudo_gt: shape mismatch");
    TaskPredictions on_original = predict(detach(x), net);
    const int n = on_original.scores->value.n();
    std::vector<Annotations> pseudo;
    pseudo.reserve(static_cast<size_t>(n));
    if (n == 1) {
        pseudo.push_back(harden_predictions(on_original, confidence_threshold));
    } else {
        for (int i = 0; i < n; ++i)
            pseudo.push_back(Annotations::from_labels(argmax_channels(on_original.scores->value, i),
                                                      Provenance::pseudo));
    }
    return distortion_gt(x_hat, pseudo, net);
}

}  // namespace taskcodec
