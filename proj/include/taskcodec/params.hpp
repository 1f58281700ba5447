#pragma once

#include <string>
#include <vector>

#include "taskcodec/autodiff.hpp"
#include "taskcodec/hash.hpp"

namespace taskcodec {

// Ordered, named collection of weight tensors. Order is part of the
// serialized format and of the fingerprint.
class ParamStore {
public:
    Var add(const std::string& name, Tensor init, bool requires_grad = true) {
        for (const auto& [n, v] : items_)
            require(n != name, ErrorKind::Internal, "duplicate parameter: " + name);
        Var v = make_leaf(std::move(init), requires_grad);
        items_.emplace_back(name, v);
        return v;
    }

    const std::vector<std::pair<std::string, Var>>& items() const { return items_; }

    Var find(const std::string& name) const {
        for (const auto& [n, v] : items_)
            if (n == name) return v;
        return nullptr;
    }

    std::vector<Var> vars() const {
        std::vector<Var> out;
        out.reserve(items_.size());
        for (const auto& [n, v] : items_) out.push_back(v);
        return out;
    }

    size_t scalar_count() const {
        size_t c = 0;
        for (const auto& [n, v] : items_) c += v->value.size();
        return c;
    }

    // Order-sensitive hash over names, shapes and raw weight bytes.
    uint64_t fingerprint() const {
        uint64_t h = 0xCBF29CE484222325ull;
        for (const auto& [n, v] : items_) {
            h = fnv1a64(n.data(), n.size(), h);
            const auto& s = v->value.shape();
            h = fnv1a64(s.data(), sizeof(int) * 4, h);
            h = fnv1a64_doubles(v->value.data(), v->value.size(), h);
        }
        return h;
    }

    void zero_grads() {
        for (auto& [n, v] : items_)
            if (v->grad_alloc) v->grad.fill(0.0);
    }

    void set_requires_grad(bool rg) {
        for (auto& [n, v] : items_) v->requires_grad = rg;
    }

    // Copies weight values from another store (shapes must match).
    void load_values_from(const ParamStore& other) {
        require(other.items_.size() == items_.size(), ErrorKind::Data, "parameter count mismatch");
        for (size_t i = 0; i < items_.size(); ++i) {
            require(items_[i].first == other.items_[i].first, ErrorKind::Data,
                    "parameter name mismatch: " + items_[i].first);
            require(items_[i].second->value.same_shape(other.items_[i].second->value), ErrorKind::Data,
                    "parameter shape mismatch: " + items_[i].first);
            items_[i].second->value = other.items_[i].second->value;
        }
    }

private:
    std::vector<std::pair<std::string, Var>> items_;
};

}  // namespace taskcodec
