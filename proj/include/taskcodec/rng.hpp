#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace taskcodec {

// Deterministic RNG. mt19937_64 has a standardized sequence, and all
// distributions are derived here from raw bits (std:: distribution
// objects are implementation-defined), so streams are reproducible
// across platforms and toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // [-0.5, 0.5) — the quantization noise proxy
    double uniform_pm_half() { return uniform() - 0.5; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // [0, n) without modulo bias
    int uniform_int(int n) {
        if (n <= 1) return 0;
        uint64_t un = static_cast<uint64_t>(n);
        uint64_t mask = ~uint64_t{0} >> __builtin_clzll(un | 1);
        uint64_t v;
        do {
            v = next_u64() & mask;
        } while (v >= un);
        return static_cast<int>(v);
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // Box-Muller
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Independent child stream for a named purpose.
    Rng fork(uint64_t tag) {
        uint64_t s = next_u64();
        return Rng(s ^ (tag * 0x9E3779B97F4A7C15ull));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[i], v[static_cast<size_t>(j)]);
        }
    }

private:
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace taskcodec
