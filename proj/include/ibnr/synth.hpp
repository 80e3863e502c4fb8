#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "ibnr/nbmodel.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/triangle.hpp"

namespace ibnr {

/// Ground-truth generator configuration; the defaults reproduce the standard
/// 72x12 study grid with logit(p) = -1.5 - 0.01 t + 0.8 d/D and
/// log(r) = 1.5 + 0.01 t - 1.8 d/D.
struct SynthConfig {
    int t_rows = 72;
    int delays = 12;
    std::array<double, 3> alpha{-1.5, -0.01, 0.8};
    std::array<double, 3> beta{1.5, 0.01, -1.8};
    uint64_t seed = 0;
    YearMonth origin_start{2018, 1};
};

struct SynthTruth {
    std::array<double, 3> alpha;
    std::array<double, 3> beta;
    uint64_t seed;
    int t_rows;
    int delays;
};

/// One NB(p, r) variate via the gamma-Poisson mixture: lambda ~
/// Gamma(shape r, scale (1-p)/p), then Poisson(lambda). Matches nb_logpmf
/// exactly for real-valued r.
long nb_sample(const CellParams& cell, Rng& rng);

/// Fully populated triangle with every cell drawn independently at the true
/// parameters. Deterministic given cfg.seed.
std::pair<ReportingTriangle, SynthTruth> generate(const SynthConfig& cfg);

} // namespace ibnr
