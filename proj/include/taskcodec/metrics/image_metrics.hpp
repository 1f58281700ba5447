#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "taskcodec/tensor.hpp"

namespace taskcodec {

// 10 log10(peak^2 / MSE) with peak 1.0; +inf sentinel at zero error (the
// sentinel is excluded from curve fitting downstream).
inline double psnr(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), ErrorKind::Shape, "psnr: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

struct SsimMaps {
    double cs_mean;    // mean contrast/structure term
    double ssim_mean;  // mean of the full per-position l*cs map
};

inline std::vector<double> gaussian_window11() {
    std::vector<double> w(11);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5.0;
        w[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<size_t>(i)];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Single-scale SSIM terms for one channel plane: 11x11 Gaussian window,
// valid positions only; contrast/structure and luminance terms clamped at 0.
inline SsimMaps ssim_terms(const std::vector<double>& a, const std::vector<double>& b, int h,
                           int w) {
    static const std::vector<double> win = gaussian_window11();
    const double C1 = 0.01 * 0.01, C2 = 0.03 * 0.03;
    const int oh = h - 10, ow = w - 10;
    require(oh > 0 && ow > 0, ErrorKind::Shape, "ssim: plane smaller than the window");

    // separable filtering
    auto blur = [&](const std::vector<double>& src) {
        std::vector<double> tmp(static_cast<size_t>(h) * ow);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < 11; ++k) s += win[static_cast<size_t>(k)] * src[static_cast<size_t>(y) * w + x + k];
                tmp[static_cast<size_t>(y) * ow + x] = s;
            }
        std::vector<double> out(static_cast<size_t>(oh) * ow);
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double s = 0.0;
                for (int k = 0; k < 11; ++k) s += win[static_cast<size_t>(k)] * tmp[static_cast<size_t>(y + k) * ow + x];
                out[static_cast<size_t>(y) * ow + x] = s;
            }
        return out;
    };

    const size_t np = a.size();
    std::vector<double> aa(np), bb(np), ab(np);
    for (size_t i = 0; i < np; ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = blur(a), mu_b = blur(b), m_aa = blur(aa), m_bb = blur(bb), m_ab = blur(ab);

    double cs_acc = 0.0, ssim_acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
        const double va = m_aa[i] - mu_a[i] * mu_a[i];
        const double vb = m_bb[i] - mu_b[i] * mu_b[i];
        const double cov = m_ab[i] - mu_a[i] * mu_b[i];
        const double cs = (2.0 * cov + C2) / (va + vb + C2);
        const double l = (2.0 * mu_a[i] * mu_b[i] + C1) / (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + C1);
        cs_acc += std::max(0.0, cs);
        ssim_acc += std::max(0.0, l * cs);
    }
    return SsimMaps{cs_acc / static_cast<double>(mu_a.size()),
                    ssim_acc / static_cast<double>(mu_a.size())};
}

// 2x2 average pooling, truncating odd trailing rows/columns.
inline void downsample2(std::vector<double>& p, int& h, int& w) {
    const int nh = h / 2, nw = w / 2;
    std::vector<double> out(static_cast<size_t>(nh) * nw);
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x)
            out[static_cast<size_t>(y) * nw + x] =
                0.25 * (p[static_cast<size_t>(2 * y) * w + 2 * x] +
                        p[static_cast<size_t>(2 * y) * w + 2 * x + 1] +
                        p[static_cast<size_t>(2 * y + 1) * w + 2 * x] +
                        p[static_cast<size_t>(2 * y + 1) * w + 2 * x + 1]);
    p = std::move(out);
    h = nh;
    w = nw;
}

}  // namespace detail

// Multi-scale SSIM: up to five scales with the conventional exponent
// weights, luminance at the coarsest scale only, computed per RGB channel
// and averaged. Inputs smaller than 11 * 2^4 on a side use fewer scales
// (weights renormalized) rather than failing.
inline double ms_ssim(const Tensor& a, const Tensor& b) {
    require(a.same_shape(b), ErrorKind::Shape, "ms_ssim: shape mismatch");
    require(a.n() == 1, ErrorKind::Shape, "ms_ssim: one image at a time");
    static const double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

    int scales = 1;
    for (int s = 2; s <= 5; ++s) {
        if ((std::min(a.h(), a.w()) >> (s - 1)) >= 11) scales = s;
    }
    double wsum = 0.0;
    for (int s = 0; s < scales; ++s) wsum += kWeights[s];

    double score = 0.0;
    for (int c = 0; c < a.c(); ++c) {
        int h = a.h(), w = a.w();
        std::vector<double> pa(static_cast<size_t>(h) * w), pb(pa.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                pa[static_cast<size_t>(y) * w + x] = a.at(0, c, y, x);
                pb[static_cast<size_t>(y) * w + x] = b.at(0, c, y, x);
            }
        double chan = 1.0;
        for (int s = 0; s < scales; ++s) {
            if (s > 0) {
                int h2 = h, w2 = w;
                detail::downsample2(pa, h, w);
                detail::downsample2(pb, h2, w2);
            }
            const auto terms = detail::ssim_terms(pa, pb, h, w);
            const double exponent = kWeights[s] / wsum;
            if (s + 1 < scales) {
                chan *= std::pow(terms.cs_mean, exponent);
            } else {
                chan *= std::pow(terms.ssim_mean, exponent);
            }
        }
        score += chan;
    }
    return score / static_cast<double>(a.c());
}

}  // namespace taskcodec
