#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "taskcodec/common.hpp"

namespace taskcodec {

// Piecewise cubic Hermite interpolation with shape-preserving slopes
// (Fritsch-Carlson weighted harmonic means, MATLAB endpoint rules) and
// closed-form per-segment integration — the classical ingredients of the
// Bjoentegaard delta.
namespace bd {

struct Interpolant {
    std::vector<double> x, y, m;  // knots and slopes
};

inline Interpolant pchip(std::vector<double> xs, std::vector<double> ys) {
    const size_t n = xs.size();
    require(n >= 2 && ys.size() == n, ErrorKind::Data, "pchip: need at least two points");
    for (size_t i = 1; i < n; ++i)
        require(xs[i] > xs[i - 1], ErrorKind::Data, "pchip: abscissae must be strictly increasing");

    std::vector<double> h(n - 1), d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs[i + 1] - xs[i];
        d[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    std::vector<double> m(n, 0.0);
    if (n == 2) {
        m[0] = m[1] = d[0];
    } else {
        for (size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        auto endpoint = [](double h0, double h1, double d0, double d1) {
            double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (s * d0 <= 0.0) return 0.0;
            if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
            return s;
        };
        m[0] = endpoint(h[0], h[1], d[0], d[1]);
        m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    }
    return Interpolant{std::move(xs), std::move(ys), std::move(m)};
}

namespace detail {
struct SegCoeff {
    double c0, c1, c2, c3;  // p(t) = c0 + c1 t + c2 t^2 + c3 t^3, t in [0,1]
    double h;
};

inline SegCoeff segment(const Interpolant& f, size_t i) {
    const double h = f.x[i + 1] - f.x[i];
    const double delta = f.y[i + 1] - f.y[i];
    SegCoeff c;
    c.h = h;
    c.c0 = f.y[i];
    c.c1 = h * f.m[i];
    c.c2 = 3.0 * delta - h * (2.0 * f.m[i] + f.m[i + 1]);
    c.c3 = -2.0 * delta + h * (f.m[i] + f.m[i + 1]);
    return c;
}
}  // namespace detail

inline double evaluate(const Interpolant& f, double t) {
    require(t >= f.x.front() - 1e-12 && t <= f.x.back() + 1e-12, ErrorKind::Data,
            "pchip: evaluation outside the knot range");
    size_t i = static_cast<size_t>(std::upper_bound(f.x.begin(), f.x.end(), t) - f.x.begin());
    i = std::min(std::max<size_t>(i, 1), f.x.size() - 1) - 1;
    const auto c = detail::segment(f, i);
    const double u = (t - f.x[i]) / c.h;
    return c.c0 + u * (c.c1 + u * (c.c2 + u * c.c3));
}

// Exact integral over [a, b] (inside the knot range): antiderivatives of
// the cubic per segment.
inline double integrate(const Interpolant& f, double a, double b) {
    require(a >= f.x.front() - 1e-12 && b <= f.x.back() + 1e-12 && a <= b, ErrorKind::Data,
            "pchip: integration range outside the knots");
    double acc = 0.0;
    for (size_t i = 0; i + 1 < f.x.size(); ++i) {
        const double lo = std::max(a, f.x[i]);
        const double hi = std::min(b, f.x[i + 1]);
        if (hi <= lo) continue;
        const auto c = detail::segment(f, i);
        auto anti = [&](double t) {
            const double u = (t - f.x[i]) / c.h;
            return c.h * u * (c.c0 + u * (c.c1 / 2.0 + u * (c.c2 / 3.0 + u * c.c3 / 4.0)));
        };
        acc += anti(hi) - anti(lo);
    }
    return acc;
}

}  // namespace bd

// One rate-quality point: bpp on the rate axis, a metric value on the
// quality axis (already in its natural unit, e.g. [0,1] task metrics or dB).
struct CurvePoint {
    double bpp;
    double metric;
};

namespace detail {
inline void sort_and_check_rate(std::vector<CurvePoint>& pts) {
    require(pts.size() >= 2, ErrorKind::Data, "bd: need at least two points per curve");
    std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
        return a.bpp < b.bpp;
    });
    for (size_t i = 1; i < pts.size(); ++i)
        require(pts[i].bpp > pts[i - 1].bpp, ErrorKind::Data, "bd: duplicate bpp in curve");
    for (const auto& p : pts)
        require(p.bpp > 0.0 && std::isfinite(p.metric), ErrorKind::Data,
                "bd: points need positive bpp and finite metrics");
}
}  // namespace detail

// Average vertical gap (test - anchor) of metric-vs-log2(rate) interpolants
// over the overlapping rate range, reported in the metric's percentage
// points (metric scaled by 100).
inline double bd_quality(std::vector<CurvePoint> anchor, std::vector<CurvePoint> test) {
    detail::sort_and_check_rate(anchor);
    detail::sort_and_check_rate(test);
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
    require(hi > lo, ErrorKind::Data, "no-overlap: rate ranges do not intersect");
    return (bd::integrate(ft, lo, hi) - bd::integrate(fa, lo, hi)) / (hi - lo);
}

// Average rate difference (percent) at equal quality: mean gap of the
// log2(rate)-vs-metric interpolants over the overlapping quality range,
// mapped back through the exponential. Negative values are rate savings.
inline double bd_rate(std::vector<CurvePoint> anchor, std::vector<CurvePoint> test) {
    auto build = [](std::vector<CurvePoint> pts) {
        require(pts.size() >= 2, ErrorKind::Data, "bd: need at least two points per curve");
        std::sort(pts.begin(), pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
            return a.metric < b.metric;
        });
        for (size_t i = 1; i < pts.size(); ++i)
            require(pts[i].metric > pts[i - 1].metric, ErrorKind::Data,
                    "bd: metric must be strictly monotone for bd_rate");
        std::vector<double> xs, ys;
        for (const auto& p : pts) {
            require(p.bpp > 0.0, ErrorKind::Data, "bd: points need positive bpp");
            xs.push_back(p.metric);
            ys.push_back(std::log2(p.bpp));
        }
        return bd::pchip(std::move(xs), std::move(ys));
    };
    const auto fa = build(std::move(anchor));
    const auto ft = build(std::move(test));
    const double lo = std::max(fa.x.front(), ft.x.front());
    const double hi = std::min(fa.x.back(), ft.x.back());
    require(hi > lo, ErrorKind::Data, "no-overlap: quality ranges do not intersect");
    const double mean_log_gap = (bd::integrate(ft, lo, hi) - bd::integrate(fa, lo, hi)) / (hi - lo);
    return 100.0 * (std::exp2(mean_log_gap) - 1.0);
}

}  // namespace taskcodec
