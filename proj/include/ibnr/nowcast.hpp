#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ibnr/mcmc.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/triangle.hpp"

namespace ibnr {

struct NowcastRow {
    int t = 0;
    YearMonth origin_month;
    long observed_partial = 0;
    double point = 0.0; // median of posterior-predictive row totals
    double lo95 = 0.0;
    double hi95 = 0.0;
    std::optional<long> realized; // backtest truth when retained
};

using NowcastResult = std::vector<NowcastRow>;

/// One posterior-predictive variate for an unobserved cell under a single
/// posterior draw.
long predictive_cell(const ModelParams& draw, int t, int d, int max_delay, Rng& rng);

/// Posterior-predictive completion of every row in the nowcast window: for
/// each retained draw, simulate the row's unobserved cells once and add the
/// observed partial sum; point = median, interval = (2.5, 97.5) percentiles.
/// Each draw owns an RNG stream derived from (seed, draw index), so results
/// are schedule-independent and adding an observed incident shifts the
/// totals by exactly +1.
///
/// `window` defaults to tri.nowcast_window(); rows listed explicitly may be
/// fully observed, in which case the point is the realized total with a
/// zero-width interval.
NowcastResult nowcast_totals(const PosteriorSamples& samples, const ReportingTriangle& tri,
                             uint64_t seed, const std::vector<int>* window = nullptr);

/// Same, over the pooled draws of an externally loaded posterior.
NowcastResult nowcast_totals(const std::vector<ModelParams>& draws, const ReportingTriangle& tri,
                             uint64_t seed, const std::vector<int>* window = nullptr);

/// (nowcast point, realized) pairs for rows whose truth is known; rows with
/// missing truth are skipped and counted in *n_excluded when provided.
std::vector<std::pair<double, double>> scatter_pairs(const NowcastResult& results,
                                                     size_t* n_excluded = nullptr);

} // namespace ibnr
