#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocgfn {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Deterministic RNG used everywhere. Wraps mt19937_64 but generates doubles
// and categorical draws itself so results do not depend on libstdc++
// distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // index in [0, n)
    int uniform_index(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
        // rejection-free: modulo bias is < 2^-50 for our n, but stay exact anyway
        uint64_t bound = n;
        uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % bound;
        uint64_t r = eng_();
        while (r >= limit) r = eng_();
        return static_cast<int>(r % bound);
    }

    // sample from unnormalized nonnegative weights
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::runtime_error("categorical: weights sum to zero");
        double u = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size() - 1);
    }

    // derive an independent stream (for eval batches, per-seed runs, ...)
    static uint64_t derive(uint64_t seed, uint64_t tag) {
        // splitmix64 over seed ^ golden-ratio-scrambled tag
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 eng_;
};

inline double log_sum_exp(std::span<const double> xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace ocgfn
