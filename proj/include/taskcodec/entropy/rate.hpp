#pragma once

#include <cmath>

#include "taskcodec/autodiff.hpp"
#include "taskcodec/entropy/factorized.hpp"
#include "taskcodec/entropy/laplace.hpp"

namespace taskcodec {

// Likelihood floor used for rate estimation and coding tables: no symbol is
// cheaper than 16 bits, and no coding bin is empty.
inline constexpr double kMinLikelihood = 1.0 / 65536.0;  // 2^-16

inline constexpr double kLog2E = 1.4426950408889634073599246810019;  // 1/ln 2

struct RateEstimate {
    double bits_y = 0.0;
    double bits_z = 0.0;
    double total_bits = 0.0;

    RateEstimate() = default;
    RateEstimate(double y, double z) : bits_y(y), bits_z(z), total_bits(y + z) {}
};

// total_bits / pixel count of the ORIGINAL (uncropped) image
inline double bits_per_pixel(double total_bits, int width, int height) {
    require(width > 0 && height > 0 && static_cast<long long>(width) * height > 0,
            ErrorKind::Shape, "bits_per_pixel: zero-area image");
    return total_bits / (static_cast<double>(width) * static_cast<double>(height));
}

// -sum log2 max(p, p_min) over all elements for the conditional Laplacian.
// Differentiable w.r.t. the latents and both entropy parameter maps.
inline Var laplace_rate_bits(const Var& v, const Var& mu, const Var& sigma) {
    require(v->value.same_shape(mu->value) && v->value.same_shape(sigma->value), ErrorKind::Shape,
            "laplace_rate_bits: shape mismatch");
    double bits = 0.0;
    for (size_t i = 0; i < v->value.size(); ++i) {
        const double p = laplace_bin_probability(v->value[i], mu->value[i], sigma->value[i]);
        bits -= std::log2(std::max(p, kMinLikelihood));
    }
    Tensor out(1, 1, 1, 1);
    out[0] = bits;
    Var node = make_node(std::move(out), {v, mu, sigma});
    if (node->requires_grad) {
        Node* np = node.get();
        Node* vp = v.get();
        Node* mp = mu.get();
        Node* sp = sigma.get();
        node->backprop = [np, vp, mp, sp] {
            const double g = np->grad[0];
            Tensor* gv = vp->requires_grad ? &ensure_grad(*vp) : nullptr;
            Tensor* gm = mp->requires_grad ? &ensure_grad(*mp) : nullptr;
            Tensor* gs = sp->requires_grad ? &ensure_grad(*sp) : nullptr;
            for (size_t i = 0; i < vp->value.size(); ++i) {
                const auto lg =
                    laplace_bin_probability_grad(vp->value[i], mp->value[i], sp->value[i]);
                if (lg.p <= kMinLikelihood) continue;  // floored: zero gradient
                const double dbits_dp = -g * kLog2E / lg.p;
                if (gv) (*gv)[i] += dbits_dp * lg.dp_dd;
                if (gm) (*gm)[i] -= dbits_dp * lg.dp_dd;
                if (gs) (*gs)[i] += dbits_dp * lg.dp_dsigma;
            }
        };
    }
    return node;
}

// Same for the hyper-latent under the factorized prior. The prior is
// captured by value (it only holds shared handles to its parameters).
inline Var factorized_rate_bits(const Var& z, FactorizedPrior prior) {
    const Tensor& zv = z->value;
    require(zv.c() == prior.channels(), ErrorKind::Shape,
            "factorized_rate_bits: channel count mismatch");
    double bits = 0.0;
    for (int n = 0; n < zv.n(); ++n)
        for (int c = 0; c < zv.c(); ++c)
            for (int y = 0; y < zv.h(); ++y)
                for (int x = 0; x < zv.w(); ++x) {
                    const double val = zv.at(n, c, y, x);
                    const double p = prior.cdf(c, val + 0.5) - prior.cdf(c, val - 0.5);
                    bits -= std::log2(std::max(p, kMinLikelihood));
                }
    Tensor out(1, 1, 1, 1);
    out[0] = bits;

    std::vector<Var> inputs = {z};
    for (auto& pv : prior.param_vars()) inputs.push_back(pv);
    Var node = make_node(std::move(out), std::move(inputs));
    if (node->requires_grad) {
        Node* np = node.get();
        Node* zp = z.get();
        node->backprop = [np, zp, prior] {
            const double g = np->grad[0];
            const Tensor& zv = zp->value;
            Tensor* gz = zp->requires_grad ? &ensure_grad(*zp) : nullptr;
            FactorizedPrior::Trace hi, lo;
            for (int n = 0; n < zv.n(); ++n)
                for (int c = 0; c < zv.c(); ++c)
                    for (int y = 0; y < zv.h(); ++y)
                        for (int x = 0; x < zv.w(); ++x) {
                            const double val = zv.at(n, c, y, x);
                            prior.forward(c, val + 0.5, hi);
                            prior.forward(c, val - 0.5, lo);
                            const double p = hi.y - lo.y;
                            if (p <= kMinLikelihood) continue;
                            const double dbits_dp = -g * kLog2E / p;
                            const double dxh = prior.backward(c, hi, dbits_dp);
                            const double dxl = prior.backward(c, lo, -dbits_dp);
                            if (gz) gz->at(n, c, y, x) += dxh + dxl;
                        }
        };
    }
    return node;
}

// Value-only estimators — identical formulas, used on rounded latents when
// reporting and for the coding-fidelity checks.
inline double estimate_laplace_bits(const Tensor& v, const Tensor& mu, const Tensor& sigma) {
    require(v.same_shape(mu) && v.same_shape(sigma), ErrorKind::Shape,
            "estimate_laplace_bits: shape mismatch");
    double bits = 0.0;
    for (size_t i = 0; i < v.size(); ++i)
        bits -= std::log2(std::max(laplace_bin_probability(v[i], mu[i], sigma[i]), kMinLikelihood));
    return bits;
}

inline double estimate_factorized_bits(const Tensor& z, const FactorizedPrior& prior) {
    double bits = 0.0;
    for (int n = 0; n < z.n(); ++n)
        for (int c = 0; c < z.c(); ++c)
            for (int y = 0; y < z.h(); ++y)
                for (int x = 0; x < z.w(); ++x) {
                    const double val = z.at(n, c, y, x);
                    const double p = prior.cdf(c, val + 0.5) - prior.cdf(c, val - 0.5);
                    bits -= std::log2(std::max(p, kMinLikelihood));
                }
    return bits;
}

}  // namespace taskcodec
