#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ibnr/kernels/loglik.hpp"
#include "ibnr/nbmodel.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/triangle.hpp"

namespace ibnr {

enum class InitMode { FromPriors, UserSupplied };

struct ChainConfig {
    int n_chains = 3;
    long burn_in = 20000;
    long total_iterations = 50000;
    int thin = 10;
    uint64_t seed = 0;
    InitMode init = InitMode::FromPriors;
    std::optional<ModelParams> init_params; // required for UserSupplied
    double target_accept = 0.30;
    int threads = 0; // 0 = one worker per chain, capped by hardware
    bool record_step_trace = false;
    kernels::SimdMode simd = kernels::SimdMode::Auto;

    void validate() const;

    long retained_per_chain() const { return (total_iterations - burn_in) / thin; }

    /// 3 chains, 2e4 burn-in, 5e4 iterations, thin 10: minutes on a laptop.
    static ChainConfig desk();
    /// 3 chains, 1e6 burn-in, 1.1e6 iterations, thin 100.
    static ChainConfig paper_scale();
};

struct PosteriorSamples {
    std::vector<std::vector<ModelParams>> chains; // [chain][draw]
    std::array<double, ModelParams::dim> accept_rates{};
    ChainConfig config;
    // Frozen proposal step sizes (log scale) per chain, and the per-batch
    // trace when ChainConfig::record_step_trace is set.
    std::vector<std::array<double, ModelParams::dim>> final_log_steps;
    std::vector<std::vector<std::array<double, ModelParams::dim>>> step_trace;

    size_t n_chains() const { return chains.size(); }
    size_t draws_per_chain() const { return chains.empty() ? 0 : chains.front().size(); }
    std::vector<ModelParams> pooled() const;
};

struct ParamSummary {
    std::string name;
    double mean, sd, q2_5, q50, q97_5;
};

struct ConvergenceReport {
    std::vector<double> psrf; // per parameter
    double mpsrf = 0.0;
    std::vector<double> ess; // per parameter
};

/// Multi-chain adaptive random-walk Metropolis targeting the model posterior.
/// Coefficients move on their natural scale, the six prior scales move as
/// log(sigma) with the Jacobian folded into the target. Step sizes adapt by
/// Robbins-Monro batches of 50 during burn-in only, then freeze.
/// Deterministic given (seed, config, data); chains own private RNG streams
/// so the result does not depend on thread scheduling.
PosteriorSamples run_chains(const ReportingTriangle& tri, const ChainConfig& cfg);

/// Gelman-Rubin potential scale reduction factor,
/// sqrt((n-1)/n + (B/n)/W); identical chains give exactly sqrt((n-1)/n).
double psrf(const PosteriorSamples& samples, int param_index);

/// Brooks-Gelman multivariate PSRF over all 12 parameters,
/// sqrt((n-1)/n + (m+1)/m * lambda1) with lambda1 the largest eigenvalue of
/// W^{-1} B/n.
double mpsrf(const PosteriorSamples& samples);

/// Same statistic over raw draws indexed [chain][draw][coordinate].
double mpsrf(const std::vector<std::vector<std::vector<double>>>& chains);

/// Effective sample size, summed over chains (Geyer initial positive
/// sequence truncation of the autocorrelation sum).
double ess(const PosteriorSamples& samples, int param_index);

ConvergenceReport convergence_report(const PosteriorSamples& samples);

/// Pooled posterior means, sds, and (2.5, 50, 97.5) percentile points by
/// linear interpolation of order statistics.
std::vector<ParamSummary> summarize(const PosteriorSamples& samples);

// --- generic single-chain core, exposed for targeted tests ---

struct RwmOptions {
    long burn_in = 1000;
    long total_iterations = 5000;
    int thin = 1;
    double target_accept = 0.30;
    std::vector<double> init_log_step; // empty = zeros
    bool record_step_trace = false;
};

struct RwmResult {
    std::vector<std::vector<double>> draws; // [draw][dim]
    std::vector<double> accept_rate;        // per coordinate, post burn-in
    std::vector<double> final_log_step;
    std::vector<std::vector<double>> step_trace; // per batch
};

using LogTarget = std::function<double(const std::vector<double>&)>;

RwmResult run_adaptive_rwm(const LogTarget& target, std::vector<double> init,
                           const RwmOptions& opts, Rng& rng);

} // namespace ibnr
