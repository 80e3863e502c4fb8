#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ibnr/triangle.hpp"

namespace ibnr {

struct DevelopmentFactors {
    std::vector<double> f; // f[k-1] for development step k = 1..D-1
};

/// Deterministic chain-ladder completion of the cumulative triangle.
struct ChainLadderResult {
    std::vector<int> rows;                        // projectable origin rows t
    std::vector<std::vector<double>> cumulative;  // [row][k-1], observed + projected
    std::vector<int> last_observed;               // per row, last observed dev index
    DevelopmentFactors factors;
    std::vector<double> reserve_by_row; // ultimate - latest observed cumulative
    double total_reserve = 0.0;

    double ultimate(size_t row_pos) const { return cumulative[row_pos].back(); }
};

ChainLadderResult chain_ladder(const ReportingTriangle& tri);

struct MackConfig {
    int alpha_exponent = 1; // 0, 1 or 2
    // weights[row][k-1] in [0,1]; defaults to all ones
    std::optional<std::vector<std::vector<double>>> weights;
};

/// Mack's distribution-free model on top of the chain-ladder point
/// completion: per-step variance parameters and reserve standard errors.
struct MackResult {
    ChainLadderResult base;
    std::vector<double> sigma2;      // per step k = 1..D-1
    std::vector<double> se_by_row;   // s.e. of each origin's reserve
    double total_se = 0.0;
};

MackResult mack(const ReportingTriangle& tri, const MackConfig& cfg = {});

struct BootstrapConfig {
    int n_resamples = 1000;
    uint64_t seed = 0;
    // Test hooks: suppress the residual resampling stage or the process
    // error stage to isolate either source of variation.
    bool resample_residuals = true;
    bool process_error = true;
    int max_retries = 50;
};

/// Two-stage residual bootstrap of the chain ladder: resample scaled Pearson
/// residuals, rebuild pseudo-triangles, refit, project, then draw process
/// error around the projected means (over-dispersed Poisson realized as a
/// gamma, rounded to integers). Point prediction is the median.
struct BootstrapResult {
    int n_resamples = 0;
    std::vector<int> rows;
    std::vector<std::vector<double>> reserve_draws; // [resample][row]
    std::vector<double> total_draws;                // [resample]
    std::vector<double> point_reserve_by_row;       // medians
    double point_total_reserve = 0.0;
    double dispersion = 0.0;
};

BootstrapResult bootstrap_chain_ladder(const ReportingTriangle& tri, const BootstrapConfig& cfg);

/// Over-dispersed Poisson GLM on the observed incrementals, log link,
/// eta = c + a_t + b_d with a and b anchored to zero on their first level.
struct GlmFit {
    double intercept = 0.0;
    std::vector<double> origin_effects; // aligned with rows, first = 0
    std::vector<double> dev_effects;    // aligned with 1..D, first = 0
    double dispersion = 0.0;            // Pearson chi^2 / (N - p)
    std::vector<int> rows;
    std::vector<std::vector<double>> fitted; // [row][d-1] fitted means, all cells
    std::vector<double> reserve_by_row;      // sum of fitted means over unobserved cells
    double total_reserve = 0.0;
    int iterations = 0;
    double deviance = 0.0;
};

GlmFit odp_glm(const ReportingTriangle& tri);

} // namespace ibnr
