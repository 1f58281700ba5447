#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "taskcodec/eval/bd.hpp"
#include "taskcodec/rng.hpp"

using namespace taskcodec;

namespace {

// smooth monotone synthetic RD curve: metric rises with log rate
std::vector<CurvePoint> synth_curve(Rng& rng, int n = 4) {
    std::vector<CurvePoint> pts;
    double bpp = rng.uniform(0.05, 0.2);
    double metric = rng.uniform(0.3, 0.5);
    for (int i = 0; i < n; ++i) {
        pts.push_back(CurvePoint{bpp, metric});
        bpp *= rng.uniform(1.6, 2.4);
        metric += rng.uniform(0.05, 0.12);
    }
    return pts;
}

// trapezoid integration of the same interpolants on a dense grid — the
// numerical route the closed-form result must match
double bd_quality_trapezoid(const std::vector<CurvePoint>& anchor,
                            const std::vector<CurvePoint>& test, int samples = 20000) {
    auto build = [](const std::vector<CurvePoint>& pts) {
        std::vector<double> xs, ys;
        for (const auto& p : pts) {
            xs.push_back(std::log2(p.bpp));
            ys.push_back(p.metric * 100.0);
        }
        return bd::pchip(std::move(xs), std::move(ys));
    };
    const auto fa = build(anchor);
    const auto ft = build(test);
    const double lo = std::max(fa.x.front(), ft.x.front());
    const double hi = std::min(fa.x.back(), ft.x.back());
    double acc = 0.0;
    double prev = bd::evaluate(ft, lo) - bd::evaluate(fa, lo);
    for (int i = 1; i <= samples; ++i) {
        const double t = lo + (hi - lo) * i / samples;
        const double cur = bd::evaluate(ft, t) - bd::evaluate(fa, t);
        acc += 0.5 * (prev + cur) * (hi - lo) / samples;
        prev = cur;
    }
    return acc / (hi - lo);
}

double bd_rate_trapezoid(const std::vector<CurvePoint>& anchor, const std::vector<CurvePoint>& test,
                         int samples = 20000) {
    auto build = [](std::vector<CurvePoint> pts) {
        std::sort(pts.begin(), pts.end(),
                  [](const CurvePoint& a, const CurvePoint& b) { return a.metric < b.metric; });
        std::vector<double> xs, ys;
        for (const auto& p : pts) {
            xs.push_back(p.metric);
            ys.push_back(std::log2(p.bpp));
        }
        return bd::pchip(std::move(xs), std::move(ys));
    };
    const auto fa = build(anchor);
    const auto ft = build(test);
    const double lo = std::max(fa.x.front(), ft.x.front());
    const double hi = std::min(fa.x.back(), ft.x.back());
    double acc = 0.0;
    double prev = bd::evaluate(ft, lo) - bd::evaluate(fa, lo);
    for (int i = 1; i <= samples; ++i) {
        const double t = lo + (hi - lo) * i / samples;
        const double cur = bd::evaluate(ft, t) - bd::evaluate(fa, t);
        acc += 0.5 * (prev + cur) * (hi - lo) / samples;
        prev = cur;
    }
    return 100.0 * (std::exp2(acc / (hi - lo)) - 1.0);
}

}  // namespace

TEST_CASE("pchip interpolates knots and preserves monotonicity") {
    auto f = bd::pchip({0.0, 1.0, 2.5, 4.0}, {1.0, 2.0, 2.2, 5.0});
    for (size_t i = 0; i < f.x.size(); ++i)
        CHECK(bd::evaluate(f, f.x[i]) == Catch::Approx(f.y[i]).margin(1e-12));
    double prev = -1e300;
    for (double t = 0.0; t <= 4.0; t += 0.01) {
        const double v = bd::evaluate(f, t);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("pchip closed-form integral matches dense trapezoid") {
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> xs{0.0}, ys;
        for (int i = 0; i < 4; ++i) xs.push_back(xs.back() + rng.uniform(0.3, 2.0));
        for (size_t i = 0; i < xs.size(); ++i) ys.push_back(rng.uniform(-2.0, 2.0));
        auto f = bd::pchip(xs, ys);
        const double a = xs.front() + 0.1, b = xs.back() - 0.1;
        double acc = 0.0;
        const int n = 50000;
        double prev = bd::evaluate(f, a);
        for (int i = 1; i <= n; ++i) {
            const double x = a + (b - a) * i / n;
            const double cur = bd::evaluate(f, x);
            acc += 0.5 * (prev + cur) * (b - a) / n;
            prev = cur;
        }
        CHECK(bd::integrate(f, a, b) == Catch::Approx(acc).margin(1e-6));
    }
}

TEST_CASE("bd identities") {
    Rng rng(13);
    auto curve = synth_curve(rng);
    CHECK(bd_quality(curve, curve) == 0.0);
    CHECK(bd_rate(curve, curve) == 0.0);

    // +0.01 metric everywhere -> exactly +1.0 pp
    auto shifted = curve;
    for (auto& p : shifted) p.metric += 0.01;
    CHECK(bd_quality(curve, shifted) == Catch::Approx(1.0).margin(1e-9));
    // anti-symmetry is exact for the constant offset
    CHECK(bd_quality(shifted, curve) == Catch::Approx(-1.0).margin(1e-9));

    // rate doubled at every quality -> +100 % BDR; halved -> -50 %
    auto doubled = curve;
    for (auto& p : doubled) p.bpp *= 2.0;
    CHECK(bd_rate(curve, doubled) == Catch::Approx(100.0).margin(1e-9));
    auto halved = curve;
    for (auto& p : halved) p.bpp *= 0.5;
    CHECK(bd_rate(curve, halved) == Catch::Approx(-50.0).margin(1e-9));
    // sign convention: better-than-anchor (higher metric) gives negative BDR
    CHECK(bd_rate(curve, shifted) < 0.0);
}

TEST_CASE("bd vs trapezoid oracle on random smooth curve pairs") {
    Rng rng(17);
    for (int t = 0; t < 30; ++t) {
        auto anchor = synth_curve(rng);
        auto test = synth_curve(rng);
        try {
            const double closed_q = bd_quality(anchor, test);
            const double trap_q = bd_quality_trapezoid(anchor, test);
            CHECK(std::fabs(closed_q - trap_q) < 0.1);
            const double closed_r = bd_rate(anchor, test);
            const double trap_r = bd_rate_trapezoid(anchor, test);
            CHECK(std::fabs(closed_r - trap_r) < 0.1);
        } catch (const Error& e) {
            // random pairs occasionally fail to overlap; that must be the
            // explicit no-overlap error, nothing else
            CHECK(std::string(e.what()).find("no-overlap") != std::string::npos);
        }
    }
}

TEST_CASE("approximate anti-symmetry on smooth pairs") {
    Rng rng(19);
    int tested = 0;
    for (int t = 0; t < 20 && tested < 10; ++t) {
        auto a = synth_curve(rng);
        auto b = synth_curve(rng);
        try {
            const double ab = bd_quality(a, b);
            const double ba = bd_quality(b, a);
            CHECK(std::fabs(ab + ba) < 0.05);
            ++tested;
        } catch (const Error&) {
        }
    }
    REQUIRE(tested >= 5);
}

TEST_CASE("bd error cases") {
    Rng rng(23);
    auto low = synth_curve(rng);
    // far-away rate range: no overlap
    auto high = low;
    for (auto& p : high) p.bpp *= 1000.0;
    CHECK_THROWS_MATCHES(bd_quality(low, high), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("no-overlap")));

    // single point is not a curve
    std::vector<CurvePoint> one{{0.5, 0.5}};
    CHECK_THROWS_AS(bd_quality(one, low), Error);

    // duplicate bpp
    auto dup = low;
    dup.push_back(dup.front());
    CHECK_THROWS_AS(bd_quality(dup, low), Error);

    // non-monotone metric cannot support bd_rate
    auto wiggle = low;
    wiggle[1].metric = wiggle[0].metric - 0.01;
    CHECK_THROWS_AS(bd_rate(low, wiggle), Error);
}
