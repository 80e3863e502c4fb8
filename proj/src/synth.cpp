#include "ibnr/synth.hpp"

#include "ibnr/common.hpp"

namespace ibnr {

long nb_sample(const CellParams& cell, Rng& rng) {
    const double scale = (1.0 - cell.p) / cell.p;
    const double lambda = rng.gamma(cell.r, scale);
    return rng.poisson(lambda);
}

std::pair<ReportingTriangle, SynthTruth> generate(const SynthConfig& cfg) {
    if (cfg.t_rows < 1 || cfg.delays < 1) {
        throw InputError("generate: need t_rows >= 1 and delays >= 1");
    }
    ModelParams params;
    params.alpha = cfg.alpha;
    params.beta = cfg.beta;

    Rng rng(cfg.seed);
    std::vector<std::vector<long>> counts(cfg.t_rows, std::vector<long>(cfg.delays, 0));
    for (int t = 1; t <= cfg.t_rows; ++t) {
        for (int d = 1; d <= cfg.delays; ++d) {
            counts[t - 1][d - 1] = nb_sample(cell_params(params, t, d, cfg.delays), rng);
        }
    }

    ReportingTriangle tri(cfg.origin_start, cfg.t_rows + 1, cfg.delays, std::move(counts));
    SynthTruth truth{cfg.alpha, cfg.beta, cfg.seed, cfg.t_rows, cfg.delays};
    return {std::move(tri), truth};
}

} // namespace ibnr
