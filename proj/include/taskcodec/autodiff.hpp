#pragma once

#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "taskcodec/tensor.hpp"

namespace taskcodec {

// Define-by-run reverse-mode autodiff. Each op builds a Node eagerly;
// backward() walks the tape in reverse topological order. Gradients of a
// node are accumulated by its consumers, so leaves keep their grads until
// explicitly zeroed (the optimizer does that after each step).
struct Node {
    Tensor value;
    Tensor grad;
    bool grad_alloc = false;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void()> backprop;  // empty for leaves/constants

    double scalar() const { return value[0]; }
};

using Var = std::shared_ptr<Node>;

inline Tensor& ensure_grad(Node& n) {
    if (!n.grad_alloc) {
        n.grad = Tensor::zeros_like(n.value);
        n.grad_alloc = true;
    }
    return n.grad;
}

inline Var make_leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    return n;
}

inline Var make_const(Tensor value) { return make_leaf(std::move(value), false); }

inline Var make_node(Tensor value, std::vector<Var> inputs) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->inputs = std::move(inputs);
    for (const auto& i : n->inputs) n->requires_grad = n->requires_grad || i->requires_grad;
    return n;
}

// Cuts the tape: same value, no gradient path.
inline Var detach(const Var& x) { return make_const(x->value); }

inline void backward(const Var& root) {
    require(root->value.size() == 1, ErrorKind::Internal, "backward() root must be scalar");
    if (!root->requires_grad) return;

    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->inputs.size()) {
            Node* child = n->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    ensure_grad(*root)[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop && n->grad_alloc) n->backprop();
    }
}

// ---- elementwise ops ----

inline Var add(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), ErrorKind::Shape, "add: shape mismatch");
    Tensor out = a->value;
    for (size_t i = 0; i < out.size(); ++i) out[i] += b->value[i];
    Var n = make_node(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* ap = a.get();
        Node* bp = b.get();
        n->backprop = [np, ap, bp] {
            if (ap->requires_grad) {
                Tensor& g = ensure_grad(*ap);
                for (size_t i = 0; i < g.size(); ++i) g[i] += np->grad[i];
            }
            if (bp->requires_grad) {
                Tensor& g = ensure_grad(*bp);
                for (size_t i = 0; i < g.size(); ++i) g[i] += np->grad[i];
            }
        };
    }
    return n;
}

inline Var sub(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), ErrorKind::Shape, "sub: shape mismatch");
    Tensor out = a->value;
    for (size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
    Var n = make_node(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* ap = a.get();
        Node* bp = b.get();
        n->backprop = [np, ap, bp] {
            if (ap->requires_grad) {
                Tensor& g = ensure_grad(*ap);
                for (size_t i = 0; i < g.size(); ++i) g[i] += np->grad[i];
            }
            if (bp->requires_grad) {
                Tensor& g = ensure_grad(*bp);
                for (size_t i = 0; i < g.size(); ++i) g[i] -= np->grad[i];
            }
        };
    }
    return n;
}

inline Var scale(const Var& a, double s) {
    Tensor out = a->value;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
    Var n = make_node(std::move(out), {a});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* ap = a.get();
        n->backprop = [np, ap, s] {
            Tensor& g = ensure_grad(*ap);
            for (size_t i = 0; i < g.size(); ++i) g[i] += s * np->grad[i];
        };
    }
    return n;
}

inline Var relu(const Var& x) {
    Tensor out = x->value;
    for (size_t i = 0; i < out.size(); ++i)
        if (out[i] < 0.0) out[i] = 0.0;
    Var n = make_node(std::move(out), {x});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* xp = x.get();
        n->backprop = [np, xp] {
            Tensor& g = ensure_grad(*xp);
            for (size_t i = 0; i < g.size(); ++i)
                if (xp->value[i] > 0.0) g[i] += np->grad[i];
        };
    }
    return n;
}

// max(x, bound); subgradient passes only where x > bound
inline Var lower_bound(const Var& x, double bound) {
    Tensor out = x->value;
    for (size_t i = 0; i < out.size(); ++i)
        if (out[i] < bound) out[i] = bound;
    Var n = make_node(std::move(out), {x});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* xp = x.get();
        n->backprop = [np, xp, bound] {
            Tensor& g = ensure_grad(*xp);
            for (size_t i = 0; i < g.size(); ++i)
                if (xp->value[i] > bound) g[i] += np->grad[i];
        };
    }
    return n;
}

inline Var slice_channels(const Var& x, int c0, int count) {
    const Tensor& v = x->value;
    require(c0 >= 0 && c0 + count <= v.c(), ErrorKind::Shape, "slice_channels out of range");
    Tensor out(v.n(), count, v.h(), v.w());
    for (int i = 0; i < v.n(); ++i)
        for (int j = 0; j < count; ++j)
            for (int y = 0; y < v.h(); ++y)
                for (int xx = 0; xx < v.w(); ++xx) out.at(i, j, y, xx) = v.at(i, c0 + j, y, xx);
    Var n = make_node(std::move(out), {x});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* xp = x.get();
        n->backprop = [np, xp, c0, count] {
            Tensor& g = ensure_grad(*xp);
            const Tensor& go = np->grad;
            for (int i = 0; i < go.n(); ++i)
                for (int j = 0; j < count; ++j)
                    for (int y = 0; y < go.h(); ++y)
                        for (int xx = 0; xx < go.w(); ++xx) g.at(i, c0 + j, y, xx) += go.at(i, j, y, xx);
        };
    }
    return n;
}

// Sum of squared differences (the feature-space distortion is a plain sum,
// not a mean).
inline Var sse(const Var& a, const Var& b) {
    require(a->value.same_shape(b->value), ErrorKind::Shape, "sse: shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < a->value.size(); ++i) {
        double d = a->value[i] - b->value[i];
        acc += d * d;
    }
    Tensor out(1, 1, 1, 1);
    out[0] = acc;
    Var n = make_node(std::move(out), {a, b});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* ap = a.get();
        Node* bp = b.get();
        n->backprop = [np, ap, bp] {
            double g = np->grad[0];
            if (ap->requires_grad) {
                Tensor& ga = ensure_grad(*ap);
                for (size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * g * (ap->value[i] - bp->value[i]);
            }
            if (bp->requires_grad) {
                Tensor& gb = ensure_grad(*bp);
                for (size_t i = 0; i < gb.size(); ++i) gb[i] -= 2.0 * g * (ap->value[i] - bp->value[i]);
            }
        };
    }
    return n;
}

inline Var mse(const Var& a, const Var& b) {
    Var s = sse(a, b);
    return scale(s, 1.0 / static_cast<double>(a->value.size()));
}

inline Var sum_all(const Var& x) {
    double acc = 0.0;
    for (size_t i = 0; i < x->value.size(); ++i) acc += x->value[i];
    Tensor out(1, 1, 1, 1);
    out[0] = acc;
    Var n = make_node(std::move(out), {x});
    if (n->requires_grad) {
        Node* np = n.get();
        Node* xp = x.get();
        n->backprop = [np, xp] {
            Tensor& g = ensure_grad(*xp);
            for (size_t i = 0; i < g.size(); ++i) g[i] += np->grad[0];
        };
    }
    return n;
}

}  // namespace taskcodec
