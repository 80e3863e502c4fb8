#include "ibnr/rng.hpp"

#include <cmath>

#include "ibnr/common.hpp"

namespace ibnr {

namespace {

inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t st = seed;
    uint64_t a = splitmix64(st);
    st = a ^ (stream * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL);
    uint64_t b = splitmix64(st);
    return splitmix64(st) ^ b;
}

Rng::Rng(uint64_t seed) {
    uint64_t st = seed;
    for (auto& s : s_) s = splitmix64(st);
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    for (;;) {
        double u = uniform01();
        if (u > 0.0) return u;
    }
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * m;
    has_cached_normal_ = true;
    return u * m;
}

double Rng::exponential() {
    return -std::log(uniform_pos());
}

double Rng::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale >= 0.0)) {
        throw NumericalError("gamma sampler requires shape > 0 and scale >= 0");
    }
    if (scale == 0.0) return 0.0;
    if (shape < 1.0) {
        // boost shape by one, then scale back by U^(1/shape)
        const double u = uniform_pos();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

long Rng::poisson(double mean) {
    if (!(mean >= 0.0)) {
        throw NumericalError("poisson sampler requires a nonnegative mean");
    }
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // inversion by sequential search
        const double p0 = std::exp(-mean);
        double p = p0;
        double f = p;
        const double u = uniform01();
        long k = 0;
        while (u > f) {
            ++k;
            p *= mean / static_cast<double>(k);
            f += p;
            if (k > 2000) break; // cannot happen for mean < 10; belt and braces
        }
        return k;
    }
    // Hormann's PTRD transformed rejection sampler.
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mean);
    for (;;) {
        double U = uniform01() - 0.5;
        double V = uniform_pos();
        const double us = 0.5 - std::fabs(U);
        const double kf = std::floor((2.0 * a / us + b) * U + mean + 0.43);
        if (us >= 0.07 && V <= v_r) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && V > us)) continue;
        const double k = kf;
        const double lhs = std::log(V * inv_alpha / (a / (us * us) + b));
        const double rhs = k * log_mu - mean - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<long>(kf);
    }
}

} // namespace ibnr
