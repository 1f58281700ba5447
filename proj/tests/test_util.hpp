#pragma once

#include "taskcodec/rng.hpp"
#include "taskcodec/tensor.hpp"

namespace taskcodec::testutil {

// Deterministic structured image pair for the MS-SSIM reference checks:
// gradient background plus soft blobs, 8-bit quantized (so the PPM dump the
// Python oracle reads is bit-identical to the in-memory data), values kept
// inside [0.05, 0.85] so a +0.1 luminance offset never clips.
inline std::pair<Tensor, Tensor> msssim_fixture_pair() {
    const int n = 192;
    Rng rng(2718);
    Tensor a(1, 3, n, n);
    struct Blob {
        double cx, cy, r, amp[3];
    };
    std::vector<Blob> blobs;
    for (int i = 0; i < 6; ++i) {
        Blob b;
        b.cx = rng.uniform(20, n - 20);
        b.cy = rng.uniform(20, n - 20);
        b.r = rng.uniform(12, 45);
        for (auto& c : b.amp) c = rng.uniform(-0.35, 0.35);
        blobs.push_back(b);
    }
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double base = 0.2 + 0.4 * (x + y) / (2.0 * n);
            for (int c = 0; c < 3; ++c) {
                double v = base;
                for (const auto& b : blobs) {
                    const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
                    v += b.amp[c] * std::exp(-d2 / (2.0 * b.r * b.r));
                }
                a.at(0, c, y, x) = std::min(0.85, std::max(0.05, v));
            }
        }
    Tensor b = a;
    for (size_t i = 0; i < b.size(); ++i)
        b[i] = std::min(0.85, std::max(0.05, b[i] + rng.uniform(-0.06, 0.06)));
    // 8-bit quantization to match the PPM dump exactly
    for (size_t i = 0; i < a.size(); ++i) a[i] = std::round(a[i] * 255.0) / 255.0;
    for (size_t i = 0; i < b.size(); ++i) b[i] = std::round(b[i] * 255.0) / 255.0;
    return {a, b};
}

}  // namespace taskcodec::testutil
