#pragma once

#include <algorithm>
#include <cmath>

#include "taskcodec/autodiff.hpp"
#include "taskcodec/rng.hpp"

namespace taskcodec {

// Strided 2-D convolution. x: (N,Ci,H,W), w: (Co,Ci,kh,kw), b: (1,Co,1,1).
// Zero padding; output (H + 2p - kh)/s + 1. Kernel ranges are clipped per
// output row/column so the inner loops run branch-free.
inline Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    const Tensor& xv = x->value;
    const Tensor& wv = w->value;
    const int N = xv.n(), Ci = xv.c(), H = xv.h(), W = xv.w();
    const int Co = wv.n(), kh = wv.h(), kw = wv.w();
    require(wv.c() == Ci, ErrorKind::Shape, "conv2d: channel mismatch");
    require(b->value.c() == Co && b->value.size() == static_cast<size_t>(Co), ErrorKind::Shape,
            "conv2d: bias shape");
    const int Ho = (H + 2 * pad - kh) / stride + 1;
    const int Wo = (W + 2 * pad - kw) / stride + 1;
    require(Ho >= 1 && Wo >= 1, ErrorKind::Shape, "conv2d: output would be empty");

    Tensor out(N, Co, Ho, Wo);
    for (int n = 0; n < N; ++n) {
        for (int co = 0; co < Co; ++co) {
            const double bias = b->value[static_cast<size_t>(co)];
            for (int oy = 0; oy < Ho; ++oy) {
                const int iy0 = oy * stride - pad;
                const int ky_lo = std::max(0, -iy0), ky_hi = std::min(kh, H - iy0);
                for (int ox = 0; ox < Wo; ++ox) {
                    const int ix0 = ox * stride - pad;
                    const int kx_lo = std::max(0, -ix0), kx_hi = std::min(kw, W - ix0);
                    double acc = bias;
                    for (int ci = 0; ci < Ci; ++ci)
                        for (int ky = ky_lo; ky < ky_hi; ++ky) {
                            const double* xr = xv.data() + xv.idx(n, ci, iy0 + ky, ix0 + kx_lo);
                            const double* wr = wv.data() + wv.idx(co, ci, ky, kx_lo);
                            for (int k = 0; k < kx_hi - kx_lo; ++k) acc += xr[k] * wr[k];
                        }
                    out.at(n, co, oy, ox) = acc;
                }
            }
        }
    }

    Var node = make_node(std::move(out), {x, w, b});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* xp = x.get();
        Node* wp = w.get();
        Node* bp = b.get();
        node->backprop = [np, xp, wp, bp, stride, pad, N, Ci, H, W, Co, kh, kw] {
            const Tensor& go = np->grad;
            const int Ho = go.h(), Wo = go.w();
            Tensor* gx = xp->requires_grad ? &ensure_grad(*xp) : nullptr;
            Tensor* gw = wp->requires_grad ? &ensure_grad(*wp) : nullptr;
            Tensor* gb = bp->requires_grad ? &ensure_grad(*bp) : nullptr;
            for (int n = 0; n < N; ++n)
                for (int co = 0; co < Co; ++co)
                    for (int oy = 0; oy < Ho; ++oy) {
                        const int iy0 = oy * stride - pad;
                        const int ky_lo = std::max(0, -iy0), ky_hi = std::min(kh, H - iy0);
                        for (int ox = 0; ox < Wo; ++ox) {
                            const double g = go.at(n, co, oy, ox);
                            if (g == 0.0) continue;
                            const int ix0 = ox * stride - pad;
                            const int kx_lo = std::max(0, -ix0), kx_hi = std::min(kw, W - ix0);
                            if (gb) (*gb)[static_cast<size_t>(co)] += g;
                            for (int ci = 0; ci < Ci; ++ci)
                                for (int ky = ky_lo; ky < ky_hi; ++ky) {
                                    const double* xr = xp->value.data() + xp->value.idx(n, ci, iy0 + ky, ix0 + kx_lo);
                                    const double* wr = wp->value.data() + wp->value.idx(co, ci, ky, kx_lo);
                                    if (gw) {
                                        double* gwr = &gw->at(co, ci, ky, kx_lo);
                                        for (int k = 0; k < kx_hi - kx_lo; ++k) gwr[k] += g * xr[k];
                                    }
                                    if (gx) {
                                        double* gxr = &gx->at(n, ci, iy0 + ky, ix0 + kx_lo);
                                        for (int k = 0; k < kx_hi - kx_lo; ++k) gxr[k] += g * wr[k];
                                    }
                                }
                        }
                    }
        };
    }
    return node;
}

// Transposed convolution (fractionally strided). x: (N,Ci,H,W),
// w: (Ci,Co,kh,kw), output (H-1)*s - 2p + kh + out_pad. Gather form: each
// output cell pulls from the input cells whose upsampled footprint covers it.
inline Var tconv2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad) {
    const Tensor& xv = x->value;
    const Tensor& wv = w->value;
    const int N = xv.n(), Ci = xv.c(), H = xv.h(), W = xv.w();
    const int Co = wv.c(), kh = wv.h(), kw = wv.w();
    require(wv.n() == Ci, ErrorKind::Shape, "tconv2d: channel mismatch");
    require(b->value.size() == static_cast<size_t>(Co), ErrorKind::Shape, "tconv2d: bias shape");
    const int Ho = (H - 1) * stride - 2 * pad + kh + out_pad;
    const int Wo = (W - 1) * stride - 2 * pad + kw + out_pad;
    require(Ho >= 1 && Wo >= 1, ErrorKind::Shape, "tconv2d: output would be empty");

    Tensor out(N, Co, Ho, Wo);
    for (int n = 0; n < N; ++n)
        for (int co = 0; co < Co; ++co)
            for (int oy = 0; oy < Ho; ++oy) {
                for (int ox = 0; ox < Wo; ++ox) {
                    double acc = b->value[static_cast<size_t>(co)];
                    for (int ky = 0; ky < kh; ++ky) {
                        const int ty = oy + pad - ky;
                        if (ty < 0) break;  // ty decreases with ky
                        if (ty % stride) continue;
                        const int iy = ty / stride;
                        if (iy >= H) continue;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int tx = ox + pad - kx;
                            if (tx < 0) break;
                            if (tx % stride) continue;
                            const int ix = tx / stride;
                            if (ix >= W) continue;
                            for (int ci = 0; ci < Ci; ++ci)
                                acc += wv.at(ci, co, ky, kx) * xv.at(n, ci, iy, ix);
                        }
                    }
                    out.at(n, co, oy, ox) = acc;
                }
            }

    Var node = make_node(std::move(out), {x, w, b});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* xp = x.get();
        Node* wp = w.get();
        Node* bp = b.get();
        node->backprop = [np, xp, wp, bp, stride, pad, N, Ci, H, W, Co, kh, kw] {
            const Tensor& go = np->grad;
            const int Ho = go.h(), Wo = go.w();
            Tensor* gx = xp->requires_grad ? &ensure_grad(*xp) : nullptr;
            Tensor* gw = wp->requires_grad ? &ensure_grad(*wp) : nullptr;
            Tensor* gb = bp->requires_grad ? &ensure_grad(*bp) : nullptr;
            for (int n = 0; n < N; ++n)
                for (int co = 0; co < Co; ++co)
                    for (int oy = 0; oy < Ho; ++oy)
                        for (int ox = 0; ox < Wo; ++ox) {
                            const double g = go.at(n, co, oy, ox);
                            if (g == 0.0) continue;
                            if (gb) (*gb)[static_cast<size_t>(co)] += g;
                            for (int ky = 0; ky < kh; ++ky) {
                                const int ty = oy + pad - ky;
                                if (ty < 0) break;
                                if (ty % stride) continue;
                                const int iy = ty / stride;
                                if (iy >= H) continue;
                                for (int kx = 0; kx < kw; ++kx) {
                                    const int tx = ox + pad - kx;
                                    if (tx < 0) break;
                                    if (tx % stride) continue;
                                    const int ix = tx / stride;
                                    if (ix >= W) continue;
                                    for (int ci = 0; ci < Ci; ++ci) {
                                        if (gw) gw->at(ci, co, ky, kx) += g * xp->value.at(n, ci, iy, ix);
                                        if (gx) gx->at(n, ci, iy, ix) += g * wp->value.at(ci, co, ky, kx);
                                    }
                                }
                            }
                        }
        };
    }
    return node;
}

namespace detail {
// PyTorch-style reflection index (border not repeated): -1 -> 1, H -> H-2.
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}
}  // namespace detail

inline Var reflect_pad(const Var& x, int top, int bottom, int left, int right) {
    const Tensor& v = x->value;
    require(top < v.h() && bottom < v.h() && left < v.w() && right < v.w(), ErrorKind::Shape,
            "reflect_pad: padding must be smaller than the input");
    Tensor out(v.n(), v.c(), v.h() + top + bottom, v.w() + left + right);
    for (int n = 0; n < v.n(); ++n)
        for (int c = 0; c < v.c(); ++c)
            for (int y = 0; y < out.h(); ++y) {
                const int sy = detail::reflect_index(y - top, v.h());
                for (int xx = 0; xx < out.w(); ++xx)
                    out.at(n, c, y, xx) = v.at(n, c, sy, detail::reflect_index(xx - left, v.w()));
            }
    Var node = make_node(std::move(out), {x});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* xp = x.get();
        node->backprop = [np, xp, top, left] {
            Tensor& g = ensure_grad(*xp);
            const Tensor& go = np->grad;
            for (int n = 0; n < go.n(); ++n)
                for (int c = 0; c < go.c(); ++c)
                    for (int y = 0; y < go.h(); ++y) {
                        const int sy = detail::reflect_index(y - top, g.h());
                        for (int xx = 0; xx < go.w(); ++xx)
                            g.at(n, c, sy, detail::reflect_index(xx - left, g.w())) += go.at(n, c, y, xx);
                    }
        };
    }
    return node;
}

inline Var crop(const Var& x, int y0, int x0, int h, int w) {
    const Tensor& v = x->value;
    require(y0 >= 0 && x0 >= 0 && y0 + h <= v.h() && x0 + w <= v.w(), ErrorKind::Shape,
            "crop out of range");
    Tensor out(v.n(), v.c(), h, w);
    for (int n = 0; n < v.n(); ++n)
        for (int c = 0; c < v.c(); ++c)
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx) out.at(n, c, y, xx) = v.at(n, c, y0 + y, x0 + xx);
    Var node = make_node(std::move(out), {x});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* xp = x.get();
        node->backprop = [np, xp, y0, x0] {
            Tensor& g = ensure_grad(*xp);
            const Tensor& go = np->grad;
            for (int n = 0; n < go.n(); ++n)
                for (int c = 0; c < go.c(); ++c)
                    for (int y = 0; y < go.h(); ++y)
                        for (int xx = 0; xx < go.w(); ++xx) g.at(n, c, y0 + y, x0 + xx) += go.at(n, c, y, xx);
        };
    }
    return node;
}

// Training-time quantization proxy: v + u, u ~ U[-0.5, 0.5) i.i.d.
// The noise is a constant of the tape, so the gradient is the identity.
inline Var add_uniform_noise(const Var& x, Rng& rng) {
    Tensor out = x->value;
    for (size_t i = 0; i < out.size(); ++i) out[i] += rng.uniform_pm_half();
    Var node = make_node(std::move(out), {x});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* xp = x.get();
        node->backprop = [np, xp] {
            Tensor& g = ensure_grad(*xp);
            for (size_t i = 0; i < g.size(); ++i) g[i] += np->grad[i];
        };
    }
    return node;
}

// Mean pixel-wise cross-entropy between logits (N,C,H,W) and integer label
// maps, skipping the ignore label. Stable log-sum-exp; backward is
// (softmax - onehot) / #valid.
inline Var softmax_cross_entropy(const Var& logits, const std::vector<LabelMap>& labels,
                                 int32_t ignore_label = kIgnoreLabel) {
    const Tensor& v = logits->value;
    const int N = v.n(), C = v.c(), H = v.h(), W = v.w();
    require(static_cast<int>(labels.size()) == N, ErrorKind::Shape, "cross_entropy: batch mismatch");
    for (const auto& lm : labels)
        require(lm.h == H && lm.w == W, ErrorKind::Shape, "cross_entropy: label map shape mismatch");

    auto lse = std::make_shared<Tensor>(N, 1, H, W);
    double loss = 0.0;
    long valid = 0;
    for (int n = 0; n < N; ++n)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const int32_t l = labels[static_cast<size_t>(n)].at(y, x);
                double m = v.at(n, 0, y, x);
                for (int c = 1; c < C; ++c) m = std::max(m, v.at(n, c, y, x));
                double s = 0.0;
                for (int c = 0; c < C; ++c) s += std::exp(v.at(n, c, y, x) - m);
                const double z = m + std::log(s);
                lse->at(n, 0, y, x) = z;
                if (l == ignore_label) continue;
                require(l >= 0 && l < C, ErrorKind::Data, "cross_entropy: label out of range");
                loss += z - v.at(n, l, y, x);
                ++valid;
            }
    require(valid > 0, ErrorKind::Data, "cross_entropy: no valid pixels");
    Tensor out(1, 1, 1, 1);
    out[0] = loss / static_cast<double>(valid);

    Var node = make_node(std::move(out), {logits});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* lp = logits.get();
        auto labs = std::make_shared<std::vector<LabelMap>>(labels);
        node->backprop = [np, lp, labs, lse, ignore_label, valid, N, C, H, W] {
            const double g = np->grad[0] / static_cast<double>(valid);
            Tensor& gl = ensure_grad(*lp);
            for (int n = 0; n < N; ++n)
                for (int y = 0; y < H; ++y)
                    for (int x = 0; x < W; ++x) {
                        const int32_t l = (*labs)[static_cast<size_t>(n)].at(y, x);
                        if (l == ignore_label) continue;
                        const double z = lse->at(n, 0, y, x);
                        for (int c = 0; c < C; ++c) {
                            const double p = std::exp(lp->value.at(n, c, y, x) - z);
                            gl.at(n, c, y, x) += g * (p - (c == l ? 1.0 : 0.0));
                        }
                    }
        };
    }
    return node;
}

// Per-pixel argmax over channels; ties resolved to the lowest class index.
inline LabelMap argmax_channels(const Tensor& scores, int n = 0) {
    LabelMap out(scores.h(), scores.w());
    for (int y = 0; y < scores.h(); ++y)
        for (int x = 0; x < scores.w(); ++x) {
            int best = 0;
            double bv = scores.at(n, 0, y, x);
            for (int c = 1; c < scores.c(); ++c) {
                const double v = scores.at(n, c, y, x);
                if (v > bv) {
                    bv = v;
                    best = c;
                }
            }
            out.at(y, x) = best;
        }
    return out;
}

}  // namespace taskcodec
