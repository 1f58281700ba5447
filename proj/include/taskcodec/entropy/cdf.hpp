#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "taskcodec/entropy/factorized.hpp"
#include "taskcodec/entropy/laplace.hpp"
#include "taskcodec/entropy/range_coder.hpp"

namespace taskcodec {

// Coding alphabet: integer residuals in [-255, 255]. The two edge bins
// absorb the remaining tail mass so the alphabet always normalizes.
inline constexpr int kResidualMax = 255;
inline constexpr int kAlphabetSize = 2 * kResidualMax + 1;  // 511

// Exact real-valued bin masses of Laplace(0, sigma) on the integer grid,
// with tail mass folded into the edge bins. Uses the geometric recurrence
// e^{-(r+1)/sigma} = e^{-r/sigma} * e^{-1/sigma}: two exp calls per table.
inline void laplace_alphabet_probs(double sigma, std::vector<double>& probs) {
    probs.resize(kAlphabetSize);
    const double step = std::exp(-1.0 / sigma);
    const double center = 1.0 - std::exp(-0.5 / sigma);  // mass of [-0.5, 0.5)
    probs[kResidualMax] = center;
    // mass(r) for r >= 1: 0.5 e^{-(r-0.5)/sigma} (1 - e^{-1/sigma})
    double m = 0.5 * std::exp(-0.5 / sigma) * (1.0 - step);
    for (int r = 1; r < kResidualMax; ++r) {
        probs[kResidualMax + r] = m;
        probs[kResidualMax - r] = m;
        m *= step;
    }
    // edge bins carry everything beyond +-254.5
    const double tail = 0.5 * std::exp(-(kResidualMax - 0.5) / sigma);
    probs[0] = tail;
    probs[2 * kResidualMax] = tail;
}

// Per-channel factorized-prior masses on the same grid.
inline void factorized_alphabet_probs(const FactorizedPrior& prior, int channel,
                                      std::vector<double>& probs) {
    probs.resize(kAlphabetSize);
    double prev = prior.cdf(channel, -kResidualMax - 0.5);
    for (int r = -kResidualMax; r <= kResidualMax; ++r) {
        const double next = prior.cdf(channel, r + 0.5);
        probs[static_cast<size_t>(r + kResidualMax)] = next - prev;
        prev = next;
    }
    // fold open tails into the edge bins
    probs[0] += prior.cdf(channel, -kResidualMax - 0.5);
    probs[kAlphabetSize - 1] += 1.0 - prev;
}

// Quantizes real masses to integer frequencies summing to 65536 with the
// largest-remainder method; every bin gets at least one count (no zero-cost
// and no impossible symbols). Deterministic: remainder ties break on the
// lower index, donors for starved bins are the largest bins.
struct QuantizedCdf {
    std::vector<uint32_t> freq;  // kAlphabetSize entries, sum = 65536
    std::vector<uint32_t> cum;   // prefix sums, size kAlphabetSize + 1

    uint32_t symbol_for_target(uint32_t target) const {
        // cum is sorted; find s with cum[s] <= target < cum[s+1]
        const auto it = std::upper_bound(cum.begin(), cum.end(), target);
        return static_cast<uint32_t>(it - cum.begin()) - 1;
    }
};

inline QuantizedCdf quantize_cdf(const std::vector<double>& probs) {
    const size_t n = probs.size();
    QuantizedCdf q;
    q.freq.assign(n, 0);
    std::vector<double> remainder(n);
    uint64_t assigned = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::max(probs[i], 0.0) * kProbScale;
        const double f = std::floor(x);
        q.freq[i] = static_cast<uint32_t>(f);
        remainder[i] = x - f;
        assigned += q.freq[i];
    }
    // distribute the leftover counts by descending remainder
    if (assigned < kProbScale) {
        uint64_t leftover = kProbScale - assigned;
        std::vector<uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
            if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
            return a < b;
        });
        for (size_t k = 0; k < n && leftover > 0; ++k, --leftover) ++q.freq[order[k]];
        // pathological: fewer bins than leftover counts (cannot happen with
        // remainders < 1 summing to leftover, but stay safe)
        for (size_t k = 0; leftover > 0; k = (k + 1) % n, --leftover) ++q.freq[k];
    } else if (assigned > kProbScale) {
        // floating-point sum slightly above one: shave the largest bins
        uint64_t excess = assigned - kProbScale;
        while (excess > 0) {
            size_t big = 0;
            for (size_t i = 1; i < n; ++i)
                if (q.freq[i] > q.freq[big]) big = i;
            require(q.freq[big] > 1, ErrorKind::Internal, "cdf quantization: degenerate masses");
            --q.freq[big];
            --excess;
        }
    }
    // lift empty bins, stealing from the largest
    for (size_t i = 0; i < n; ++i) {
        if (q.freq[i] != 0) continue;
        size_t big = 0;
        for (size_t k = 1; k < n; ++k)
            if (q.freq[k] > q.freq[big]) big = k;
        require(q.freq[big] >= 2, ErrorKind::Internal, "cdf quantization: nothing to steal");
        --q.freq[big];
        q.freq[i] = 1;
    }
    q.cum.resize(n + 1);
    q.cum[0] = 0;
    for (size_t i = 0; i < n; ++i) q.cum[i + 1] = q.cum[i] + q.freq[i];
    require(q.cum[n] == kProbScale, ErrorKind::Internal, "cdf quantization: bad total");
    return q;
}

inline QuantizedCdf laplace_quantized_cdf(double sigma) {
    std::vector<double> p;
    laplace_alphabet_probs(sigma, p);
    return quantize_cdf(p);
}

}  // namespace taskcodec
