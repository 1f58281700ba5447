#pragma once

#include <cmath>

#include "taskcodec/params.hpp"
#include "taskcodec/rng.hpp"

namespace taskcodec {

namespace detail {
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}
}  // namespace detail

// Learned per-channel non-parametric CDF for the hyper-latent. Each channel
// owns a tiny monotone scalar chain 1->3->3->3->1: affine maps with
// softplus-reparameterized (non-negative) weights, gated-tanh increments
// between them, sigmoid head. Monotone by construction, limits 0 and 1.
class FactorizedPrior {
public:
    static constexpr int kWidth = 3;

    FactorizedPrior() = default;

    FactorizedPrior(ParamStore& store, int channels, Rng& rng) : channels_(channels) {
        const double h_init = std::log(std::expm1(std::pow(10.0, -0.25)));
        auto mk_h = [&](const char* name, int rows, int cols) {
            return store.add(name, Tensor(channels, 1, rows, cols, h_init));
        };
        auto mk_b = [&](const char* name, int rows) {
            Tensor t(channels, 1, rows, 1);
            for (size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-0.5, 0.5);
            return store.add(name, std::move(t));
        };
        auto mk_a = [&](const char* name, int rows) {
            return store.add(name, Tensor(channels, 1, rows, 1, 0.0));
        };
        h_[0] = mk_h("prior.h0", kWidth, 1);
        b_[0] = mk_b("prior.b0", kWidth);
        a_[0] = mk_a("prior.a0", kWidth);
        h_[1] = mk_h("prior.h1", kWidth, kWidth);
        b_[1] = mk_b("prior.b1", kWidth);
        a_[1] = mk_a("prior.a1", kWidth);
        h_[2] = mk_h("prior.h2", kWidth, kWidth);
        b_[2] = mk_b("prior.b2", kWidth);
        a_[2] = mk_a("prior.a2", kWidth);
        h_[3] = mk_h("prior.h3", 1, kWidth);
        b_[3] = mk_b("prior.b3", 1);
    }

    // Rebind to existing parameters (after loading a checkpoint).
    static FactorizedPrior from_store(const ParamStore& store, int channels) {
        FactorizedPrior p;
        p.channels_ = channels;
        const char* hn[4] = {"prior.h0", "prior.h1", "prior.h2", "prior.h3"};
        const char* bn[4] = {"prior.b0", "prior.b1", "prior.b2", "prior.b3"};
        const char* an[3] = {"prior.a0", "prior.a1", "prior.a2"};
        for (int i = 0; i < 4; ++i) {
            p.h_[i] = store.find(hn[i]);
            p.b_[i] = store.find(bn[i]);
            require(p.h_[i] && p.b_[i], ErrorKind::Data, "factorized prior parameters missing");
        }
        for (int i = 0; i < 3; ++i) {
            p.a_[i] = store.find(an[i]);
            require(static_cast<bool>(p.a_[i]), ErrorKind::Data, "factorized prior parameters missing");
        }
        return p;
    }

    int channels() const { return channels_; }
    bool initialized() const { return channels_ > 0; }

    struct Trace {
        double x;
        double t0[kWidth], u1[kWidth];
        double t1[kWidth], u2[kWidth];
        double t2[kWidth], u3[kWidth];
        double t3;
        double y;  // sigmoid(t3) = CDF(x)
    };

    void forward(int ch, double x, Trace& tr) const {
        tr.x = x;
        for (int i = 0; i < kWidth; ++i) {
            tr.t0[i] = detail::softplus(hv(0, ch, i, 0)) * x + bv(0, ch, i);
            tr.u1[i] = tr.t0[i] + std::tanh(av(0, ch, i)) * std::tanh(tr.t0[i]);
        }
        for (int i = 0; i < kWidth; ++i) {
            double s = bv(1, ch, i);
            for (int j = 0; j < kWidth; ++j) s += detail::softplus(hv(1, ch, i, j)) * tr.u1[j];
            tr.t1[i] = s;
            tr.u2[i] = s + std::tanh(av(1, ch, i)) * std::tanh(s);
        }
        for (int i = 0; i < kWidth; ++i) {
            double s = bv(2, ch, i);
            for (int j = 0; j < kWidth; ++j) s += detail::softplus(hv(2, ch, i, j)) * tr.u2[j];
            tr.t2[i] = s;
            tr.u3[i] = s + std::tanh(av(2, ch, i)) * std::tanh(s);
        }
        double s = bv(3, ch, 0);
        for (int j = 0; j < kWidth; ++j) s += detail::softplus(hv(3, ch, 0, j)) * tr.u3[j];
        tr.t3 = s;
        tr.y = detail::sigmoid(s);
    }

    double cdf(int ch, double x) const {
        Trace tr;
        forward(ch, x, tr);
        return tr.y;
    }

    // Chain rule through one CDF evaluation: accumulates parameter gradients
    // (scaled by upstream dy) into the parameter grad tensors and returns
    // dy * d(cdf)/dx.
    double backward(int ch, const Trace& tr, double dy) const {
        const double dt3 = dy * tr.y * (1.0 - tr.y);
        double du3[kWidth];
        {
            Tensor& gh = ensure_grad(*h_[3]);
            Tensor& gb = ensure_grad(*b_[3]);
            gb.at(ch, 0, 0, 0) += dt3;
            for (int j = 0; j < kWidth; ++j) {
                const double raw = hv(3, ch, 0, j);
                gh.at(ch, 0, 0, j) += dt3 * tr.u3[j] * detail::sigmoid(raw);
                du3[j] = dt3 * detail::softplus(raw);
            }
        }
        double du2[kWidth];
        layer_backward(2, ch, tr.t2, tr.u2, du3, du2);
        double du1[kWidth];
        layer_backward(1, ch, tr.t1, tr.u1, du2, du1);

        double dx = 0.0;
        {
            Tensor& gh = ensure_grad(*h_[0]);
            Tensor& gb = ensure_grad(*b_[0]);
            Tensor& ga = ensure_grad(*a_[0]);
            for (int i = 0; i < kWidth; ++i) {
                const double tt = std::tanh(tr.t0[i]);
                const double ta = std::tanh(av(0, ch, i));
                const double dt = du1[i] * (1.0 + ta * (1.0 - tt * tt));
                ga.at(ch, 0, i, 0) += du1[i] * tt * (1.0 - ta * ta);
                gb.at(ch, 0, i, 0) += dt;
                const double raw = hv(0, ch, i, 0);
                gh.at(ch, 0, i, 0) += dt * tr.x * detail::sigmoid(raw);
                dx += dt * detail::softplus(raw);
            }
        }
        return dx;
    }

    // d(cdf)/dx only, no parameter gradients.
    double dcdf_dx(int ch, const Trace& tr) const {
        double d_out[kWidth];
        const double dt3 = tr.y * (1.0 - tr.y);
        for (int j = 0; j < kWidth; ++j) d_out[j] = dt3 * detail::softplus(hv(3, ch, 0, j));
        double d_mid[kWidth];
        chain_dx(2, ch, tr.t2, d_out, d_mid);
        double d_in[kWidth];
        chain_dx(1, ch, tr.t1, d_mid, d_in);
        double dx = 0.0;
        for (int i = 0; i < kWidth; ++i) {
            const double tt = std::tanh(tr.t0[i]);
            const double ta = std::tanh(av(0, ch, i));
            dx += d_in[i] * (1.0 + ta * (1.0 - tt * tt)) * detail::softplus(hv(0, ch, i, 0));
        }
        return dx;
    }

    std::vector<Var> param_vars() const {
        return {h_[0], b_[0], a_[0], h_[1], b_[1], a_[1], h_[2], b_[2], a_[2], h_[3], b_[3]};
    }

private:
    // Backward through gated layer l (input u_in, pre-activation t,
    // upstream du_out w.r.t. the layer output).
    void layer_backward(int l, int ch, const double* t, const double* u_in, const double* du_out,
                        double* du_in) const {
        Tensor& gh = ensure_grad(*h_[l]);
        Tensor& gb = ensure_grad(*b_[l]);
        Tensor& ga = ensure_grad(*a_[l]);
        double dt[kWidth];
        for (int i = 0; i < kWidth; ++i) {
            const double tt = std::tanh(t[i]);
            const double ta = std::tanh(av(l, ch, i));
            dt[i] = du_out[i] * (1.0 + ta * (1.0 - tt * tt));
            ga.at(ch, 0, i, 0) += du_out[i] * tt * (1.0 - ta * ta);
            gb.at(ch, 0, i, 0) += dt[i];
        }
        for (int j = 0; j < kWidth; ++j) du_in[j] = 0.0;
        for (int i = 0; i < kWidth; ++i)
            for (int j = 0; j < kWidth; ++j) {
                const double raw = hv(l, ch, i, j);
                gh.at(ch, 0, i, j) += dt[i] * u_in[j] * detail::sigmoid(raw);
                du_in[j] += dt[i] * detail::softplus(raw);
            }
    }

    void chain_dx(int l, int ch, const double* t, const double* d_out, double* d_in) const {
        double dt[kWidth];
        for (int i = 0; i < kWidth; ++i) {
            const double tt = std::tanh(t[i]);
            const double ta = std::tanh(av(l, ch, i));
            dt[i] = d_out[i] * (1.0 + ta * (1.0 - tt * tt));
        }
        for (int j = 0; j < kWidth; ++j) d_in[j] = 0.0;
        for (int i = 0; i < kWidth; ++i)
            for (int j = 0; j < kWidth; ++j) d_in[j] += dt[i] * detail::softplus(hv(l, ch, i, j));
    }

    double hv(int l, int ch, int r, int c) const { return h_[l]->value.at(ch, 0, r, c); }
    double bv(int l, int ch, int r) const { return b_[l]->value.at(ch, 0, r, 0); }
    double av(int l, int ch, int r) const { return a_[l]->value.at(ch, 0, r, 0); }

    int channels_ = 0;
    Var h_[4], b_[4], a_[3];
};

}  // namespace taskcodec
