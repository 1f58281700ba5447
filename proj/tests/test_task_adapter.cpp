#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "taskcodec/task/adapter.hpp"
#include "taskcodec/train/strategies.hpp"

using namespace taskcodec;

namespace {

FrozenNetworkHandle random_net(uint64_t seed = 7) {
    TaskNetConfig cfg;
    cfg.num_classes = 2;
    return FrozenNetworkHandle(TaskNet(cfg, seed), "random");
}

Tensor random_image(Rng& rng, int h = 64, int w = 64) {
    Tensor t(1, 3, h, w);
    for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform();
    return t;
}

}  // namespace

TEST_CASE("predict: shape contract and determinism") {
    auto net = random_net();
    Rng rng(1);
    Tensor img = random_image(rng);
    TaskPredictions p1 = predict(img, net);
    REQUIRE(p1.is_semantic());
    CHECK(p1.scores->value.c() == 2);
    CHECK(p1.scores->value.h() == 64);
    CHECK(p1.scores->value.w() == 64);

    TaskPredictions p2 = predict(img, net);
    for (size_t i = 0; i < p1.scores->value.size(); ++i)
        REQUIRE(p1.scores->value[i] == p2.scores->value[i]);

    // constant image also fine; task net handles non-multiples of 8 via padding
    Tensor odd(1, 3, 70, 50, 0.25);
    TaskPredictions p3 = predict(odd, net);
    CHECK(p3.scores->value.h() == 70);
    CHECK(p3.scores->value.w() == 50);

    Tensor tiny(1, 3, 8, 8, 0.1);
    CHECK_THROWS_MATCHES(predict(tiny, net), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("incompatible-input-size")));
}

TEST_CASE("predict gradient w.r.t. input matches finite differences") {
    auto net = random_net(11);
    Rng rng(2);
    Tensor img = random_image(rng, 24, 24);
    Var x = make_leaf(img, true);
    Var s = sum_all(predict(x, net).scores);
    backward(s);
    REQUIRE(x->grad_alloc);

    Rng pick(3);
    for (int k = 0; k < 5; ++k) {
        const size_t i = static_cast<size_t>(pick.uniform_int(static_cast<int>(img.size())));
        const double keep = x->value[i];
        const double eps = 1e-6;
        x->value[i] = keep + eps;
        const double up = sum_all(predict(x, net).scores)->value[0];
        x->value[i] = keep - eps;
        const double dn = sum_all(predict(x, net).scores)->value[0];
        x->value[i] = keep;
        const double fd = (up - dn) / (2 * eps);
        CHECK(std::fabs(fd - x->grad[i]) / std::max({std::fabs(fd), std::fabs(x->grad[i]), 1e-6}) <
              1e-3);
    }
}

TEST_CASE("extract_features: cut points, determinism, continuity") {
    auto net = random_net(13);
    Rng rng(4);
    Tensor img = random_image(rng);
    Var x = make_const(img);

    Var f1 = extract_features(x, net, "stage1");
    CHECK(f1->value.h() == 32);
    CHECK(f1->value.w() == 32);
    Var f2 = extract_features(x, net, "stage2");
    CHECK(f2->value.h() == 16);
    Var f3 = extract_features(x, net, "stage3");
    CHECK(f3->value.h() == 8);

    Var f1b = extract_features(x, net, "stage1");
    for (size_t i = 0; i < f1->value.size(); ++i) REQUIRE(f1->value[i] == f1b->value[i]);

    CHECK_THROWS_MATCHES(extract_features(x, net, "p9"), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("unknown-cut-point")));

    // continuity: feature delta vanishes as the perturbation shrinks
    double prev = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        Tensor pert = img;
        pert[0] += eps;
        Var fp = extract_features(make_const(pert), net, "stage2");
        double norm = 0.0;
        for (size_t i = 0; i < fp->value.size(); ++i) {
            const double d = fp->value[i] - f2->value[i];
            norm += d * d;
        }
        norm = std::sqrt(norm);
        CHECK(norm < prev);
        prev = norm;
    }
    CHECK(prev < 1e-5);
}

TEST_CASE("harden_predictions: argmax, ties, thresholds, idempotence") {
    // semantic path
    Tensor scores(1, 2, 1, 2);
    scores.at(0, 0, 0, 0) = 0.9;
    scores.at(0, 1, 0, 0) = 0.1;
    scores.at(0, 0, 0, 1) = 0.5;
    scores.at(0, 1, 0, 1) = 0.5;  // tie -> class 0
    TaskPredictions p;
    p.scores = make_const(scores);
    Annotations ann = harden_predictions(p, 0.5);
    CHECK(ann.provenance == Provenance::pseudo);
    REQUIRE(ann.semantic.has_value());
    CHECK(ann.semantic->at(0, 0) == 0);
    CHECK(ann.semantic->at(0, 1) == 0);

    // instance path: score filter + mask binarization
    TaskPredictions pi;
    RawInstance a;
    a.class_id = 1;
    a.score = 0.95;
    a.mask_h = 2;
    a.mask_w = 2;
    a.soft_mask = {0.9, 0.4, 0.51, 0.1};
    RawInstance b = a;
    b.score = 0.3;
    pi.instances = std::vector<RawInstance>{a, b};
    Annotations ai = harden_predictions(pi, 0.5);
    REQUIRE(ai.instances.has_value());
    REQUIRE(ai.instances->size() == 1);
    CHECK((*ai.instances)[0].mask.data == std::vector<uint8_t>{1, 0, 1, 0});

    // empty set is valid
    TaskPredictions pe;
    pe.instances = std::vector<RawInstance>{};
    Annotations ae = harden_predictions(pe, 0.5);
    CHECK(ae.instances->empty());

    // idempotence on the induced raw form: one-hot scores from the label map
    // harden back to the same labels
    Tensor onehot(1, 2, 1, 2, 0.0);
    for (int x = 0; x < 2; ++x) onehot.at(0, ann.semantic->at(0, x), 0, x) = 1.0;
    TaskPredictions p2;
    p2.scores = make_const(onehot);
    Annotations ann2 = harden_predictions(p2, 0.5);
    CHECK(ann2.semantic->data == ann.semantic->data);
}

TEST_CASE("task_loss: cross-entropy anchors and provenance blindness") {
    // uniform raw scores, pseudo label 0 -> ln 2
    TaskPredictions p;
    p.scores = make_leaf(Tensor(1, 2, 4, 4, 0.0), true);
    Annotations pseudo = Annotations::from_labels(LabelMap(4, 4, 0), Provenance::pseudo);
    Var l1 = task_loss(p, pseudo);
    CHECK(l1->value[0] == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    // one-hot with large margin -> ~0
    Tensor conf(1, 2, 4, 4, 0.0);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) conf.at(0, 0, y, x) = 25.0;
    TaskPredictions pc;
    pc.scores = make_const(conf);
    CHECK(task_loss(pc, pseudo)->value[0] <= 1e-6);

    // identical formula for both provenances, bitwise
    Annotations gt = pseudo;
    gt.provenance = Provenance::ground_truth;
    CHECK(task_loss(p, pseudo)->value[0] == task_loss(p, gt)->value[0]);

    // schema mismatch
    Annotations inst = Annotations::from_instances({}, Provenance::ground_truth);
    CHECK_THROWS_MATCHES(task_loss(p, inst), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("schema-mismatch")));
}

TEST_CASE("assert_frozen detects any weight change") {
    auto net = random_net(17);
    CHECK(assert_frozen(net));
    // perturb one weight through the (const-cast) handle; the fingerprint flips
    auto& store = const_cast<TaskNet&>(net.net()).params();
    store.items()[2].second->value[0] += 1e-9;
    CHECK_FALSE(assert_frozen(net));
    store.items()[2].second->value[0] -= 1e-9;
    CHECK(assert_frozen(net));
}

TEST_CASE("substitution identity: pseudo-gt distortion is the gt path with swapped labels") {
    auto net = random_net(19);
    Rng rng(5);
    for (int t = 0; t < 50; ++t) {
        Tensor x = random_image(rng);
        Tensor xh = x;
        for (size_t i = 0; i < xh.size(); ++i) xh[i] = std::min(1.0, std::max(0.0, xh[i] + rng.uniform(-0.1, 0.1)));
        Var x_hat = make_const(xh);
        Var xv = make_const(x);

        const double via_pseudo = distortion_pseudo_gt(x_hat, xv, net, 0.5)->value[0];
        const double via_gt =
            distortion_gt(x_hat, harden_predictions(predict(xv, net), 0.5), net)->value[0];
        REQUIRE(via_pseudo == via_gt);  // bitwise
    }
}

TEST_CASE("gradient transparency: loss reaches upstream parameters, net stays frozen") {
    auto net = random_net(23);
    Rng rng(6);
    Tensor x = random_image(rng, 32, 32);

    // a trainable "upstream" parameter: per-pixel offset added to the image
    Var offset = make_leaf(Tensor(1, 3, 32, 32, 0.0), true);
    Var x_hat = add(make_const(x), offset);
    const uint64_t before = net.fingerprint();
    Var loss = distortion_pseudo_gt(x_hat, make_const(x), net, 0.5);
    backward(loss);
    REQUIRE(offset->grad_alloc);
    double norm = 0.0;
    for (size_t i = 0; i < offset->grad.size(); ++i) norm += std::fabs(offset->grad[i]);
    CHECK(norm > 0.0);
    CHECK(net.net().params().fingerprint() == before);
    CHECK(assert_frozen(net));
    // no gradient buffers materialized on the frozen weights
    for (const auto& [name, var] : net.net().params().items()) CHECK_FALSE(var->grad_alloc);
}

TEST_CASE("task checkpoint round trip preserves the fingerprint") {
    TaskNetConfig cfg;
    cfg.num_classes = 4;
    TaskNet net(cfg, 77);
    const uint64_t fp = net.params().fingerprint();
    const auto path = std::filesystem::temp_directory_path() / "taskcodec_test_tasknet.ckpt";
    save_task_net(path, net);
    FrozenNetworkHandle loaded = load_task_net(path);
    CHECK(loaded.fingerprint() == fp);
    CHECK(assert_frozen(loaded));
    std::filesystem::remove(path);
}
