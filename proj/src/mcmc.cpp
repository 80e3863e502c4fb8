#include "ibnr/mcmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ibnr/common.hpp"
#include "ibnr/stats.hpp"

namespace ibnr {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kBatch = 50; // Robbins-Monro adaptation batch length
} // namespace

void ChainConfig::validate() const {
    if (n_chains < 1) throw InputError("ChainConfig: need at least one chain");
    if (thin < 1) throw InputError("ChainConfig: thin must be >= 1");
    if (burn_in < 0 || total_iterations <= burn_in) {
        throw InputError("ChainConfig: total_iterations must exceed burn_in");
    }
    if (!(target_accept > 0.0 && target_accept < 1.0)) {
        throw InputError("ChainConfig: target_accept must lie in (0,1)");
    }
    if (init == InitMode::UserSupplied && !init_params) {
        throw InputError("ChainConfig: user-supplied init requires init_params");
    }
}

ChainConfig ChainConfig::desk() {
    ChainConfig c;
    c.n_chains = 3;
    c.burn_in = 20000;
    c.total_iterations = 50000;
    c.thin = 10;
    return c;
}

ChainConfig ChainConfig::paper_scale() {
    ChainConfig c;
    c.n_chains = 3;
    c.burn_in = 1000000;
    c.total_iterations = 1100000;
    c.thin = 100;
    return c;
}

std::vector<ModelParams> PosteriorSamples::pooled() const {
    std::vector<ModelParams> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    return all;
}

RwmResult run_adaptive_rwm(const LogTarget& target, std::vector<double> init,
                           const RwmOptions& opts, Rng& rng) {
    const size_t dim = init.size();
    std::vector<double> log_step = opts.init_log_step;
    if (log_step.empty()) log_step.assign(dim, 0.0);
    if (log_step.size() != dim) throw InputError("run_adaptive_rwm: init_log_step size mismatch");

    RwmResult res;
    res.accept_rate.assign(dim, 0.0);
    res.draws.reserve(static_cast<size_t>((opts.total_iterations - opts.burn_in) / opts.thin));

    std::vector<double> state = std::move(init);
    double lp = target(state);
    if (!std::isfinite(lp)) throw NumericalError("run_adaptive_rwm: non-finite target at init");

    std::vector<long> batch_accepts(dim, 0);
    std::vector<long> kept_accepts(dim, 0);
    long batch_index = 0;

    for (long iter = 1; iter <= opts.total_iterations; ++iter) {
        for (size_t j = 0; j < dim; ++j) {
            const double old = state[j];
            state[j] = old + std::exp(log_step[j]) * rng.normal();
            const double lp_new = target(state);
            const double u = rng.uniform_pos();
            if (std::log(u) < lp_new - lp) {
                lp = lp_new;
                ++batch_accepts[j];
                if (iter > opts.burn_in) ++kept_accepts[j];
            } else {
                state[j] = old;
            }
        }

        if (iter <= opts.burn_in && iter % kBatch == 0) {
            ++batch_index;
            const double gain = std::min(1.0, 3.0 / std::sqrt(static_cast<double>(batch_index)));
            for (size_t j = 0; j < dim; ++j) {
                const double rate = static_cast<double>(batch_accepts[j]) / kBatch;
                log_step[j] += gain * (rate - opts.target_accept);
                // keep the walk recoverable: an unbounded step explodes when a
                // chain starts in a flat far-tail region and then freezes it
                log_step[j] = std::clamp(log_step[j], std::log(1e-4), std::log(20.0));
                batch_accepts[j] = 0;
            }
            if (opts.record_step_trace) res.step_trace.push_back(log_step);
        } else if (iter % kBatch == 0 && opts.record_step_trace) {
            res.step_trace.push_back(log_step);
        }

        if (iter > opts.burn_in && (iter - opts.burn_in) % opts.thin == 0) {
            res.draws.push_back(state);
        }
    }

    const double post = static_cast<double>(opts.total_iterations - opts.burn_in);
    for (size_t j = 0; j < dim; ++j) {
        res.accept_rate[j] = static_cast<double>(kept_accepts[j]) / post;
    }
    res.final_log_step = std::move(log_step);
    return res;
}

namespace {

// Sampler state: [alpha0..2, beta0..2, log sigma_a0..2, log sigma_b0..2].
ModelParams params_from_state(const std::vector<double>& u) {
    ModelParams p;
    for (int i = 0; i < 3; ++i) {
        p.alpha[i] = u[i];
        p.beta[i] = u[3 + i];
        p.sigma_alpha[i] = std::exp(u[6 + i]);
        p.sigma_beta[i] = std::exp(u[9 + i]);
    }
    return p;
}

// log posterior in the transformed state, Jacobian included:
// prior terms written directly in u = log(sigma) to avoid exp round-trips.
double log_posterior_u(const std::vector<double>& u, const kernels::LoglikGrid& grid,
                       kernels::LoglikFn kernel) {
    constexpr double kHalfLog2Pi = 0.91893853320467274178;
    double lp = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double x = u[i];
        const double lu = u[6 + i];
        const double sigma = std::exp(lu);
        if (!std::isfinite(sigma)) return kNegInf;
        const double z = x * std::exp(-lu);
        lp += -kHalfLog2Pi - lu - 0.5 * z * z; // N(x; 0, sigma^2)
        lp += -sigma;                          // Exp(sigma; 1)
        lp += lu;                              // d sigma / d u
    }
    if (!std::isfinite(lp)) return kNegInf;

    kernels::LinkCoeffs c{u[0], u[1], u[2], u[3], u[4], u[5]};
    return lp + kernel(grid, c);
}

std::array<double, ModelParams::dim> to_array(const std::vector<double>& v) {
    std::array<double, ModelParams::dim> a{};
    std::copy_n(v.begin(), ModelParams::dim, a.begin());
    return a;
}

struct ChainOutput {
    std::vector<ModelParams> draws;
    std::vector<double> accept_rate;
    std::array<double, ModelParams::dim> final_log_steps{};
    std::vector<std::array<double, ModelParams::dim>> step_trace;
};

ChainOutput run_one_chain(int chain_index, const kernels::LoglikGrid& grid,
                          kernels::LoglikFn kernel, const ChainConfig& cfg) {
    Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(chain_index));

    const LogTarget target = [&grid, kernel](const std::vector<double>& u) {
        return log_posterior_u(u, grid, kernel);
    };

    std::vector<double> init(ModelParams::dim, 0.0);
    if (cfg.init == InitMode::UserSupplied) {
        const ModelParams& p = *cfg.init_params;
        for (int i = 0; i < 3; ++i) {
            if (!(p.sigma_alpha[i] > 0.0) || !(p.sigma_beta[i] > 0.0)) {
                throw InputError("user-supplied init has nonpositive scales");
            }
            init[i] = p.alpha[i];
            init[3 + i] = p.beta[i];
            init[6 + i] = std::log(p.sigma_alpha[i]);
            init[9 + i] = std::log(p.sigma_beta[i]);
        }
        if (!std::isfinite(target(init))) {
            throw NumericalError("chain " + std::to_string(chain_index) +
                                 ": non-finite posterior at user-supplied init");
        }
    } else {
        // scales from Exp(1), coefficients from their conditional N(0, sigma^2) priors
        bool ok = false;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            for (int i = 0; i < 6; ++i) {
                const double sigma = rng.exponential();
                init[6 + i] = std::log(sigma);
                init[i] = sigma * rng.normal();
            }
            ok = std::isfinite(target(init));
        }
        if (!ok) {
            throw NumericalError("chain " + std::to_string(chain_index) +
                                 ": no finite-posterior initial state after 100 draws");
        }
    }

    RwmOptions opts;
    opts.burn_in = cfg.burn_in;
    opts.total_iterations = cfg.total_iterations;
    opts.thin = cfg.thin;
    opts.target_accept = cfg.target_accept;
    opts.record_step_trace = cfg.record_step_trace;
    // starting scales: modest moves for intercept-like coefficients, smaller
    // for the per-month slopes, wider for the log-sigmas
    opts.init_log_step = {std::log(0.1), std::log(0.02), std::log(0.1),
                          std::log(0.1), std::log(0.02), std::log(0.1),
                          std::log(0.5), std::log(0.5),  std::log(0.5),
                          std::log(0.5), std::log(0.5),  std::log(0.5)};

    RwmResult r = run_adaptive_rwm(target, std::move(init), opts, rng);

    ChainOutput out;
    out.draws.reserve(r.draws.size());
    for (const auto& u : r.draws) out.draws.push_back(params_from_state(u));
    out.accept_rate = std::move(r.accept_rate);
    out.final_log_steps = to_array(r.final_log_step);
    out.step_trace.reserve(r.step_trace.size());
    for (const auto& s : r.step_trace) out.step_trace.push_back(to_array(s));
    return out;
}

} // namespace

PosteriorSamples run_chains(const ReportingTriangle& tri, const ChainConfig& cfg) {
    cfg.validate();
    const kernels::LoglikGrid grid = build_loglik_grid(tri);
    if (grid.size() == 0) throw InputError("run_chains: triangle has no observed cells");
    const kernels::LoglikFn kernel = kernels::select_loglik_kernel(cfg.simd);

    std::vector<ChainOutput> outputs(cfg.n_chains);
    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, cfg.n_chains);

    if (workers == 1) {
        for (int c = 0; c < cfg.n_chains; ++c) outputs[c] = run_one_chain(c, grid, kernel, cfg);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (;;) {
                        const int c = next.fetch_add(1);
                        if (c >= cfg.n_chains) break;
                        outputs[c] = run_one_chain(c, grid, kernel, cfg);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    PosteriorSamples samples;
    samples.config = cfg;
    const double denom = static_cast<double>(cfg.n_chains);
    for (auto& out : outputs) {
        samples.chains.push_back(std::move(out.draws));
        for (int j = 0; j < ModelParams::dim; ++j) {
            samples.accept_rates[j] += out.accept_rate[j] / denom;
        }
        samples.final_log_steps.push_back(out.final_log_steps);
        samples.step_trace.push_back(std::move(out.step_trace));
    }
    return samples;
}

namespace {

std::vector<std::vector<double>> chain_series(const PosteriorSamples& s, int param_index) {
    if (param_index < 0 || param_index >= ModelParams::dim) {
        throw InputError("parameter index out of range");
    }
    std::vector<std::vector<double>> series;
    for (const auto& chain : s.chains) {
        std::vector<double> xs;
        xs.reserve(chain.size());
        for (const auto& p : chain) xs.push_back(p.flat()[param_index]);
        series.push_back(std::move(xs));
    }
    return series;
}

} // namespace

double psrf(const PosteriorSamples& samples, int param_index) {
    const auto series = chain_series(samples, param_index);
    const size_t m = series.size();
    if (m < 2) throw InputError("psrf needs at least two chains");
    const size_t n = series.front().size();
    if (n < 10) throw InputError("psrf needs at least 10 draws per chain");

    std::vector<double> means;
    double w = 0.0;
    for (const auto& xs : series) {
        if (xs.size() != n) throw InputError("psrf: chains have unequal lengths");
        means.push_back(mean(xs));
        w += sample_variance(xs);
    }
    w /= static_cast<double>(m);
    if (w == 0.0) throw ConvergenceError("psrf: zero within-chain variance (degenerate chains)");
    const double b_over_n = sample_variance(means);
    const double nn = static_cast<double>(n);
    return std::sqrt((nn - 1.0) / nn + b_over_n / w);
}

double mpsrf(const std::vector<std::vector<std::vector<double>>>& chains) {
    const size_t m = chains.size();
    if (m < 2) throw InputError("mpsrf needs at least two chains");
    const size_t n = chains.front().size();
    if (n < 10) throw InputError("mpsrf needs at least 10 draws per chain");
    const int dim = static_cast<int>(chains.front().front().size());

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd chain_means(static_cast<Eigen::Index>(m), dim);
    for (size_t c = 0; c < m; ++c) {
        if (chains[c].size() != n) throw InputError("mpsrf: chains have unequal lengths");
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), dim);
        for (size_t i = 0; i < n; ++i) {
            for (int j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), j) = chains[c][i][j];
        }
        const Eigen::RowVectorXd mu = x.colwise().mean();
        chain_means.row(static_cast<Eigen::Index>(c)) = mu;
        const Eigen::MatrixXd centered = x.rowwise() - mu;
        w += centered.transpose() * centered / static_cast<double>(n - 1);
    }
    w /= static_cast<double>(m);

    const Eigen::RowVectorXd grand = chain_means.colwise().mean();
    const Eigen::MatrixXd cm = chain_means.rowwise() - grand;
    const Eigen::MatrixXd b_over_n = cm.transpose() * cm / static_cast<double>(m - 1);

    const Eigen::LLT<Eigen::MatrixXd> llt(w);
    if (llt.info() != Eigen::Success) {
        throw ConvergenceError(
            "mpsrf: singular within-chain covariance; run chains longer or reparametrize");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b_over_n, w);
    if (ges.info() != Eigen::Success) {
        throw ConvergenceError("mpsrf: eigenvalue computation failed");
    }
    const double lambda1 = ges.eigenvalues().maxCoeff();
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    return std::sqrt((nn - 1.0) / nn + (mm + 1.0) / mm * lambda1);
}

double mpsrf(const PosteriorSamples& samples) {
    std::vector<std::vector<std::vector<double>>> chains;
    for (const auto& chain : samples.chains) {
        std::vector<std::vector<double>> rows;
        rows.reserve(chain.size());
        for (const auto& p : chain) {
            const auto flat = p.flat();
            rows.emplace_back(flat.begin(), flat.end());
        }
        chains.push_back(std::move(rows));
    }
    return mpsrf(chains);
}

double ess(const PosteriorSamples& samples, int param_index) {
    const auto series = chain_series(samples, param_index);
    double total = 0.0;
    for (const auto& xs : series) {
        const size_t n = xs.size();
        if (n < 4) {
            total += static_cast<double>(n);
            continue;
        }
        const double mu = mean(xs);
        double gamma0 = 0.0;
        for (double x : xs) gamma0 += (x - mu) * (x - mu);
        gamma0 /= static_cast<double>(n);
        if (gamma0 == 0.0) {
            total += static_cast<double>(n);
            continue;
        }
        auto rho = [&](size_t lag) {
            double g = 0.0;
            for (size_t i = 0; i + lag < n; ++i) g += (xs[i] - mu) * (xs[i + lag] - mu);
            return g / (static_cast<double>(n) * gamma0);
        };
        // Geyer initial positive sequence: add rho in pairs while positive.
        double tau = 1.0;
        const size_t max_lag = std::min(n - 2, static_cast<size_t>(2000));
        for (size_t k = 1; k + 1 <= max_lag; k += 2) {
            const double pair = rho(k) + rho(k + 1);
            if (pair <= 0.0) break;
            tau += 2.0 * pair;
        }
        total += static_cast<double>(n) / tau;
    }
    return total;
}

ConvergenceReport convergence_report(const PosteriorSamples& samples) {
    ConvergenceReport rep;
    for (int j = 0; j < ModelParams::dim; ++j) {
        rep.psrf.push_back(psrf(samples, j));
        rep.ess.push_back(ess(samples, j));
    }
    rep.mpsrf = mpsrf(samples);
    return rep;
}

std::vector<ParamSummary> summarize(const PosteriorSamples& samples) {
    const auto pooled = samples.pooled();
    if (pooled.empty()) throw InputError("summarize: empty posterior");
    std::vector<ParamSummary> out;
    for (int j = 0; j < ModelParams::dim; ++j) {
        std::vector<double> xs;
        xs.reserve(pooled.size());
        for (const auto& p : pooled) xs.push_back(p.flat()[j]);
        ParamSummary s;
        s.name = param_names()[j];
        s.mean = mean(xs);
        s.sd = xs.size() > 1 ? std::sqrt(sample_variance(xs)) : 0.0;
        std::sort(xs.begin(), xs.end());
        s.q2_5 = quantile(xs, 0.025);
        s.q50 = quantile(xs, 0.5);
        s.q97_5 = quantile(xs, 0.975);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace ibnr
