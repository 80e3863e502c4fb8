#include "ibnr/nowcast.hpp"

#include <algorithm>

#include "ibnr/common.hpp"
#include "ibnr/stats.hpp"
#include "ibnr/synth.hpp"

namespace ibnr {

long predictive_cell(const ModelParams& draw, int t, int d, int max_delay, Rng& rng) {
    return nb_sample(cell_params(draw, t, d, max_delay), rng);
}

NowcastResult nowcast_totals(const std::vector<ModelParams>& draws, const ReportingTriangle& tri,
                             uint64_t seed, const std::vector<int>* window_arg) {
    if (draws.empty()) throw InputError("nowcast: empty posterior");

    const std::vector<int> window = window_arg ? *window_arg : tri.nowcast_window();
    const int D = tri.max_delay();

    NowcastResult result;
    if (window.empty()) return result;
    for (int t : window) {
        if (t < 1 || t > tri.n_rows() || t > tri.present() - 1) {
            throw InputError("nowcast: row " + std::to_string(t) + " outside the observed rows");
        }
    }

    // totals[row][draw]
    std::vector<std::vector<double>> totals(window.size(),
                                            std::vector<double>(draws.size(), 0.0));
    std::vector<long> partials(window.size());
    std::vector<bool> complete(window.size());
    for (size_t w = 0; w < window.size(); ++w) {
        partials[w] = tri.observed_partial_total(window[w]);
        complete[w] = tri.row_fully_observed(window[w]);
    }

    for (size_t s = 0; s < draws.size(); ++s) {
        Rng rng = Rng::stream(seed, static_cast<uint64_t>(s));
        for (size_t w = 0; w < window.size(); ++w) {
            if (complete[w]) {
                totals[w][s] = static_cast<double>(partials[w]);
                continue;
            }
            const int t = window[w];
            long sim = 0;
            for (int d = 1; d <= D; ++d) {
                if (tri.observed(t, d)) continue;
                sim += predictive_cell(draws[s], t, d, D, rng);
            }
            totals[w][s] = static_cast<double>(partials[w] + sim);
        }
    }

    for (size_t w = 0; w < window.size(); ++w) {
        const int t = window[w];
        NowcastRow row;
        row.t = t;
        row.origin_month = tri.origin_month(t);
        row.observed_partial = partials[w];
        std::sort(totals[w].begin(), totals[w].end());
        row.point = quantile(totals[w], 0.5);
        row.lo95 = quantile(totals[w], 0.025);
        row.hi95 = quantile(totals[w], 0.975);
        row.realized = tri.realized_total(t);
        result.push_back(std::move(row));
    }
    return result;
}

NowcastResult nowcast_totals(const PosteriorSamples& samples, const ReportingTriangle& tri,
                             uint64_t seed, const std::vector<int>* window) {
    return nowcast_totals(samples.pooled(), tri, seed, window);
}

std::vector<std::pair<double, double>> scatter_pairs(const NowcastResult& results,
                                                     size_t* n_excluded) {
    std::vector<std::pair<double, double>> pairs;
    size_t excluded = 0;
    for (const auto& row : results) {
        if (row.realized) {
            pairs.emplace_back(row.point, static_cast<double>(*row.realized));
        } else {
            ++excluded;
        }
    }
    if (n_excluded) *n_excluded = excluded;
    return pairs;
}

} // namespace ibnr
