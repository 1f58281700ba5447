#include <catch2/catch_amalgamated.hpp>

#include "taskcodec/autodiff.hpp"
#include "taskcodec/hash.hpp"
#include "taskcodec/io/bytes.hpp"
#include "taskcodec/nn_ops.hpp"
#include "taskcodec/rng.hpp"
#include "taskcodec/tensor.hpp"

using namespace taskcodec;

namespace {

Tensor random_tensor(Rng& rng, int n, int c, int h, int w, double scale = 1.0) {
    Tensor t(n, c, h, w);
    for (size_t i = 0; i < t.size(); ++i) t[i] = rng.normal() * scale;
    return t;
}

// Central finite differences against the tape for every coordinate of the
// chosen leaf. build() must construct a scalar graph from the current leaf
// values.
template <typename Build>
void check_gradients(const std::vector<Var>& leaves, Build build, double eps = 1e-6,
                     double tol = 1e-6) {
    Var root = build();
    backward(root);
    for (const Var& leaf : leaves) {
        REQUIRE(leaf->grad_alloc);
        for (size_t i = 0; i < leaf->value.size(); ++i) {
            const double keep = leaf->value[i];
            leaf->value[i] = keep + eps;
            const double up = build()->value[0];
            leaf->value[i] = keep - eps;
            const double dn = build()->value[0];
            leaf->value[i] = keep;
            const double fd = (up - dn) / (2.0 * eps);
            const double bp = leaf->grad[i];
            const double denom = std::max({std::fabs(fd), std::fabs(bp), 1e-4});
            INFO("coordinate " << i << " fd=" << fd << " bp=" << bp);
            CHECK(std::fabs(fd - bp) / denom < tol);
        }
    }
}

}  // namespace

TEST_CASE("rng is deterministic and in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const int k = r.uniform_int(30);
        REQUIRE(k >= 0);
        REQUIRE(k < 30);
    }
}

TEST_CASE("crc32 and fnv1a match reference values") {
    const char* s = "123456789";
    CHECK(crc32(s, 9) == 0xCBF43926u);
    CHECK(fnv1a64(nullptr, 0) == 0xCBF29CE484222325ull);
    CHECK(adler32(s, 9) == 0x091E01DEu);
}

TEST_CASE("byte writer/reader round trip") {
    ByteWriter w;
    w.put_u8(0xAB);
    w.put_u16le(0x1234);
    w.put_u32le(0xDEADBEEF);
    w.put_u32be(0xDEADBEEF);
    w.put_u64be(0x0102030405060708ull);
    w.put_f64le(-0.1);
    ByteReader r(w.bytes);
    CHECK(r.get_u8() == 0xAB);
    CHECK(r.get_u16le() == 0x1234);
    CHECK(r.get_u32le() == 0xDEADBEEF);
    CHECK(r.get_u32be() == 0xDEADBEEF);
    CHECK(r.get_u64be() == 0x0102030405060708ull);
    CHECK(r.get_f64le() == -0.1);
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS(r.get_u8(), Error);
    // big-endian byte order on the wire
    CHECK(w.bytes[3] == 0xEF);  // LE low byte first
    CHECK(w.bytes[7] == 0xDE);  // BE high byte first
}

TEST_CASE("elementwise ops match finite differences") {
    Rng rng(11);
    Var a = make_leaf(random_tensor(rng, 1, 2, 3, 3), true);
    Var b = make_leaf(random_tensor(rng, 1, 2, 3, 3), true);

    SECTION("add/sub/scale/sse chain") {
        check_gradients({a, b}, [&] { return sse(scale(add(a, b), 0.7), sub(a, b)); });
    }
    SECTION("relu") {
        check_gradients({a}, [&] { return sum_all(relu(a)); });
    }
    SECTION("mse") {
        check_gradients({a, b}, [&] { return mse(a, b); });
    }
    SECTION("lower_bound passes gradient only above the bound") {
        check_gradients({a}, [&] { return sum_all(lower_bound(a, 0.25)); });
    }
    SECTION("slice_channels") {
        check_gradients({a}, [&] { return sse(slice_channels(a, 1, 1), slice_channels(b, 0, 1)); });
    }
}

TEST_CASE("conv2d matches finite differences") {
    Rng rng(13);
    Var x = make_leaf(random_tensor(rng, 2, 2, 6, 6), true);
    Var w = make_leaf(random_tensor(rng, 3, 2, 3, 3, 0.5), true);
    Var b = make_leaf(random_tensor(rng, 1, 3, 1, 1, 0.1), true);
    Var target = make_const(random_tensor(rng, 2, 3, 3, 3));
    check_gradients({x, w, b}, [&] { return sse(conv2d(x, w, b, 2, 1), target); }, 1e-6, 1e-5);
}

TEST_CASE("conv2d output shape uses floor((H + 2p - k) / s) + 1") {
    Rng rng(17);
    Var x = make_const(random_tensor(rng, 1, 1, 7, 7));
    Var w = make_const(random_tensor(rng, 4, 1, 5, 5));
    Var b = make_const(Tensor(1, 4, 1, 1));
    Var y = conv2d(x, w, b, 2, 2);
    CHECK(y->value.h() == 4);  // ceil(7/2)
    CHECK(y->value.w() == 4);
}

TEST_CASE("tconv2d matches finite differences and doubles extent") {
    Rng rng(19);
    Var x = make_leaf(random_tensor(rng, 1, 3, 4, 4), true);
    Var w = make_leaf(random_tensor(rng, 3, 2, 5, 5, 0.4), true);
    Var b = make_leaf(random_tensor(rng, 1, 2, 1, 1, 0.1), true);
    Var y = tconv2d(x, w, b, 2, 2, 1);
    CHECK(y->value.h() == 8);
    CHECK(y->value.w() == 8);
    Var target = make_const(random_tensor(rng, 1, 2, 8, 8));
    check_gradients({x, w, b}, [&] { return sse(tconv2d(x, w, b, 2, 2, 1), target); }, 1e-6, 1e-5);
}

TEST_CASE("reflect_pad and crop round trip with gradients") {
    Rng rng(23);
    Var x = make_leaf(random_tensor(rng, 1, 2, 5, 6), true);
    Var padded = reflect_pad(x, 0, 3, 0, 2);
    CHECK(padded->value.h() == 8);
    CHECK(padded->value.w() == 8);
    // reflected values reference interior rows
    CHECK(padded->value.at(0, 0, 5, 0) == x->value.at(0, 0, 3, 0));
    Var back = crop(padded, 0, 0, 5, 6);
    for (size_t i = 0; i < x->value.size(); ++i) REQUIRE(back->value[i] == x->value[i]);

    Var target = make_const(random_tensor(rng, 1, 2, 8, 8));
    check_gradients({x}, [&] { return sse(reflect_pad(x, 0, 3, 0, 2), target); });
}

TEST_CASE("uniform noise: bounded, identity gradient, reproducible") {
    Rng rng(101);
    Var x = make_leaf(random_tensor(rng, 1, 4, 8, 8), true);
    Rng noise_rng(555);
    Var noisy = add_uniform_noise(x, noise_rng);
    for (size_t i = 0; i < x->value.size(); ++i) {
        const double d = noisy->value[i] - x->value[i];
        REQUIRE(d >= -0.5);
        REQUIRE(d < 0.5);
    }
    Rng noise_rng2(555);
    Var noisy2 = add_uniform_noise(x, noise_rng2);
    for (size_t i = 0; i < x->value.size(); ++i) REQUIRE(noisy->value[i] == noisy2->value[i]);

    backward(sse(noisy, make_const(Tensor::zeros_like(x->value))));
    // d(sum (x+u)^2)/dx = 2(x+u)
    for (size_t i = 0; i < x->value.size(); ++i)
        CHECK(x->grad[i] == Catch::Approx(2.0 * noisy->value[i]).margin(1e-12));
}

TEST_CASE("noise sample mean over 1e6 draws is near zero") {
    Rng rng(2024);
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) acc += rng.uniform_pm_half();
    CHECK(std::fabs(acc / n) < 0.002);
}

TEST_CASE("softmax cross entropy: values and gradients") {
    // uniform two-class scores, label 0 -> ln 2
    Var logits = make_leaf(Tensor(1, 2, 2, 2, 0.0), true);
    std::vector<LabelMap> labels{LabelMap(2, 2, 0)};
    Var ce = softmax_cross_entropy(logits, labels);
    CHECK(ce->value[0] == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    // confident correct prediction -> ~0
    Tensor conf(1, 2, 2, 2, 0.0);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) conf.at(0, 0, y, x) = 30.0;
    Var ce2 = softmax_cross_entropy(make_leaf(std::move(conf), true), labels);
    CHECK(ce2->value[0] <= 1e-6);

    // ignore label skips pixels
    std::vector<LabelMap> with_ignore{LabelMap(2, 2, 0)};
    with_ignore[0].at(0, 0) = kIgnoreLabel;
    Var ce3 = softmax_cross_entropy(logits, with_ignore);
    CHECK(ce3->value[0] == Catch::Approx(std::log(2.0)).epsilon(1e-12));

    Rng rng(31);
    Var raw = make_leaf(random_tensor(rng, 2, 3, 4, 4), true);
    std::vector<LabelMap> rl{LabelMap(4, 4), LabelMap(4, 4)};
    for (auto& lm : rl)
        for (auto& v : lm.data) v = rng.uniform_int(3);
    rl[1].at(2, 2) = kIgnoreLabel;
    check_gradients({raw}, [&] { return softmax_cross_entropy(raw, rl); });
}

TEST_CASE("argmax ties break to the lowest class index") {
    Tensor scores(1, 3, 1, 2);
    scores.at(0, 0, 0, 0) = 0.5;
    scores.at(0, 1, 0, 0) = 0.5;
    scores.at(0, 2, 0, 0) = 0.1;
    scores.at(0, 0, 0, 1) = 0.1;
    scores.at(0, 2, 0, 1) = 0.9;
    LabelMap m = argmax_channels(scores);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.at(0, 1) == 2);
}

TEST_CASE("detach blocks the gradient path") {
    Rng rng(37);
    Var x = make_leaf(random_tensor(rng, 1, 1, 2, 2), true);
    Var loss = sse(x, detach(scale(x, 2.0)));
    backward(loss);
    REQUIRE(x->grad_alloc);
    // with the target branch detached: d/dx sum (x - 2x)^2 = 2(x-2x) = -2x... but
    // only through the first argument: 2*(x - 2x)*1 = -2x
    for (size_t i = 0; i < x->value.size(); ++i)
        CHECK(x->grad[i] == Catch::Approx(-2.0 * x->value[i]).margin(1e-12));
}

TEST_CASE("backward accumulates once per path and handles diamonds") {
    Var x = make_leaf(Tensor(1, 1, 1, 1, 3.0), true);
    Var y = add(scale(x, 2.0), scale(x, 5.0));  // 7x
    backward(sse(y, make_const(Tensor(1, 1, 1, 1, 0.0))));
    // d/dx (7x)^2 = 98x
    CHECK(x->grad[0] == Catch::Approx(98.0 * 3.0 / 3.0 * 3.0).margin(1e-9));
    CHECK(x->grad[0] == Catch::Approx(98.0 * 3.0).margin(1e-9));
}
