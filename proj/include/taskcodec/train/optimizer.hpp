#pragma once

#include <cmath>
#include <vector>

#include "taskcodec/autodiff.hpp"

namespace taskcodec {

// Adam with bias correction. step() applies the update from the
// accumulated gradients and zeroes them.
class Adam {
public:
    explicit Adam(std::vector<Var> params, double lr = 1e-4, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& p : params_) {
            m_.push_back(Tensor::zeros_like(p->value));
            v_.push_back(Tensor::zeros_like(p->value));
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            Node& p = *params_[i];
            if (!p.grad_alloc) continue;
            Tensor& m = m_[i];
            Tensor& v = v_[i];
            for (size_t k = 0; k < p.value.size(); ++k) {
                const double g = p.grad[k];
                m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
                v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
                p.value[k] -= lr_ * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps_);
            }
            p.grad.fill(0.0);
        }
    }

    int iterations() const { return t_; }

private:
    std::vector<Var> params_;
    std::vector<Tensor> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

}  // namespace taskcodec
