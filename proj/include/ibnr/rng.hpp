#pragma once

#include <cstdint>

namespace ibnr {

/// splitmix64 step; also the hash used to derive independent stream seeds.
uint64_t splitmix64(uint64_t& state);

/// Deterministic seed for sub-stream `stream` of a run seeded with `seed`.
/// Chains, posterior draws, bootstrap resamples and replicates each own one
/// of these so results do not depend on scheduling order.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

/// xoshiro256++ generator with hand-rolled samplers. The standard library
/// distributions are implementation-defined, so everything downstream of a
/// --seed flag goes through this class to keep outputs reproducible across
/// compilers.
class Rng {
public:
    explicit Rng(uint64_t seed);

    static Rng stream(uint64_t seed, uint64_t stream_id) { return Rng(mix_seed(seed, stream_id)); }

    uint64_t next_u64();

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01();

    /// Uniform on (0, 1); safe as a log() argument.
    double uniform_pos();

    /// Standard normal (polar method, second variate cached).
    double normal();

    /// Exponential with rate 1.
    double exponential();

    /// Gamma(shape, scale), Marsaglia–Tsang squeeze method; exact for any shape > 0.
    double gamma(double shape, double scale);

    /// Poisson(mean); inversion for small means, Hormann's PTRD rejection
    /// sampler for large ones. Exact for all means >= 0.
    long poisson(double mean);

private:
    uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace ibnr
