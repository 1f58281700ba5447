#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "taskcodec/common.hpp"

namespace taskcodec {

// Dense NCHW tensor of doubles. Everything in the codec path runs in
// double precision so that the finite-difference gradient checks hold.
class Tensor {
public:
    Tensor() : shape_{0, 0, 0, 0} {}
    Tensor(int n, int c, int h, int w, double fill = 0.0)
        : shape_{n, c, h, w}, data_(static_cast<size_t>(n) * c * h * w, fill) {
        require(n >= 0 && c >= 0 && h >= 0 && w >= 0, ErrorKind::Shape, "negative tensor dim");
    }

    static Tensor zeros_like(const Tensor& t) { return Tensor(t.n(), t.c(), t.h(), t.w()); }

    int n() const { return shape_[0]; }
    int c() const { return shape_[1]; }
    int h() const { return shape_[2]; }
    int w() const { return shape_[3]; }
    const std::array<int, 4>& shape() const { return shape_; }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int i, int j, int y, int x) { return data_[idx(i, j, y, x)]; }
    double at(int i, int j, int y, int x) const { return data_[idx(i, j, y, x)]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    size_t idx(int i, int j, int y, int x) const {
        return ((static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + y) * shape_[3] + x;
    }

private:
    std::array<int, 4> shape_;
    std::vector<double> data_;
};

// Per-pixel integer class labels (semantic segmentation annotations).
struct LabelMap {
    int h = 0;
    int w = 0;
    std::vector<int32_t> data;

    LabelMap() = default;
    LabelMap(int h_, int w_, int32_t fill = 0) : h(h_), w(w_), data(static_cast<size_t>(h_) * w_, fill) {}
    int32_t& at(int y, int x) { return data[static_cast<size_t>(y) * w + x]; }
    int32_t at(int y, int x) const { return data[static_cast<size_t>(y) * w + x]; }
    bool same_shape(const LabelMap& o) const { return h == o.h && w == o.w; }
};

inline constexpr int32_t kIgnoreLabel = 255;

// Images are (1,3,H,W) tensors in [0,1]; the four stride-2 stages need
// H,W >= 64 so the latent is at least 4x4 after padding.
inline constexpr int kMinImageDim = 64;

inline void check_image(const Tensor& x) {
    require(x.n() >= 1 && x.c() == 3, ErrorKind::Shape, "image tensor must be (N,3,H,W)");
    require(x.h() >= kMinImageDim && x.w() >= kMinImageDim, ErrorKind::Shape,
            "dimension-too-small: image sides must be >= 64");
    require(x.all_finite(), ErrorKind::Shape, "image tensor contains non-finite values");
}

inline Tensor clamp01(Tensor x) {
    for (size_t i = 0; i < x.size(); ++i) x[i] = std::min(1.0, std::max(0.0, x[i]));
    return x;
}

}  // namespace taskcodec
