#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ibnr/common.hpp"
#include "ibnr/mcmc.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/stats.hpp"
#include "ibnr/synth.hpp"

using namespace ibnr;

namespace {

ReportingTriangle small_triangle(uint64_t seed = 3) {
    SynthConfig cfg;
    cfg.t_rows = 10;
    cfg.delays = 3;
    cfg.seed = seed;
    return generate(cfg).first;
}

ChainConfig quick_config() {
    ChainConfig cfg;
    cfg.n_chains = 2;
    cfg.burn_in = 500;
    cfg.total_iterations = 1500;
    cfg.thin = 10;
    cfg.seed = 7;
    return cfg;
}

// wrap a single series per chain into PosteriorSamples (alpha0 slot)
PosteriorSamples wrap_series(const std::vector<std::vector<double>>& chains) {
    PosteriorSamples s;
    for (const auto& xs : chains) {
        std::vector<ModelParams> draws;
        for (double x : xs) {
            ModelParams p;
            p.alpha[0] = x;
            draws.push_back(p);
        }
        s.chains.push_back(std::move(draws));
    }
    return s;
}

} // namespace

TEST_CASE("retention arithmetic: (total - burn_in)/thin draws per chain") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.burn_in = 300;
    cfg.total_iterations = 1300;
    cfg.thin = 10;
    CHECK(cfg.retained_per_chain() == 100);
    const auto samples = run_chains(tri, cfg);
    REQUIRE(samples.chains.size() == 2);
    CHECK(samples.chains[0].size() == 100);
    CHECK(samples.chains[1].size() == 100);
}

TEST_CASE("identical seeds give bit-identical draws, independent of threads") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    const auto a = run_chains(tri, cfg);
    const auto b = run_chains(tri, cfg);
    ChainConfig serial = cfg;
    serial.threads = 1;
    const auto c = run_chains(tri, serial);
    for (size_t ch = 0; ch < a.chains.size(); ++ch) {
        for (size_t i = 0; i < a.chains[ch].size(); ++i) {
            REQUIRE(a.chains[ch][i].flat() == b.chains[ch][i].flat());
            REQUIRE(a.chains[ch][i].flat() == c.chains[ch][i].flat());
        }
    }

    ChainConfig other = cfg;
    other.seed = 8;
    const auto d = run_chains(tri, other);
    CHECK(a.chains[0][0].flat() != d.chains[0][0].flat());
}

TEST_CASE("exchanging chain indices leaves summarize and psrf unchanged") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.n_chains = 3;
    auto samples = run_chains(tri, cfg);
    const auto sum1 = summarize(samples);
    const double r1 = psrf(samples, 0);
    std::swap(samples.chains[0], samples.chains[2]);
    const auto sum2 = summarize(samples);
    const double r2 = psrf(samples, 0);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
    for (int j = 0; j < 12; ++j) {
        CHECK(sum1[j].mean == doctest::Approx(sum2[j].mean).epsilon(1e-12));
        CHECK(sum1[j].q50 == doctest::Approx(sum2[j].q50).epsilon(1e-12));
    }
}

TEST_CASE("psrf: exact copies give exactly sqrt((n-1)/n)") {
    Rng rng(71);
    std::vector<double> xs(500);
    for (auto& x : xs) x = rng.normal();
    const auto samples = wrap_series({xs, xs, xs});
    const double n = 500.0;
    CHECK(psrf(samples, 0) == std::sqrt((n - 1.0) / n)); // bitwise equal
}

TEST_CASE("psrf: independent chains from one normal sit near 1") {
    Rng rng(73);
    std::vector<std::vector<double>> chains(3, std::vector<double>(10000));
    for (auto& c : chains) {
        for (auto& x : c) x = rng.normal();
    }
    const auto samples = wrap_series(chains);
    const double r = psrf(samples, 0);
    CHECK(r > 0.99);
    CHECK(r < 1.05);

    // shifting one chain by 10 standard deviations inflates it far beyond 1.2
    for (auto& x : chains[0]) x += 10.0;
    CHECK(psrf(wrap_series(chains), 0) > 1.2);
}

TEST_CASE("psrf input validation") {
    Rng rng(79);
    std::vector<double> xs(100);
    for (auto& x : xs) x = rng.normal();
    CHECK_THROWS_AS(psrf(wrap_series({xs}), 0), InputError); // one chain
    const std::vector<double> constant(100, 2.5);
    CHECK_THROWS_AS(psrf(wrap_series({constant, constant}), 0), ConvergenceError); // W = 0
}

TEST_CASE("mpsrf: identical chains, 1-dim consistency, singular detection") {
    Rng rng(83);
    // identical chains: B = 0, statistic is sqrt((n-1)/n)
    std::vector<std::vector<double>> one(600);
    for (auto& row : one) row = {rng.normal()};
    const std::vector<std::vector<std::vector<double>>> same{one, one};
    CHECK(mpsrf(same) == doctest::Approx(std::sqrt(599.0 / 600.0)).epsilon(1e-12));

    // 1-dim case: mpsrf^2 - (n-1)/n = (m+1)/m * (psrf^2 - (n-1)/n)
    std::vector<std::vector<std::vector<double>>> chains(3);
    std::vector<std::vector<double>> series(3);
    for (auto& c : chains) c.resize(400);
    for (int c = 0; c < 3; ++c) {
        series[c].resize(400);
        for (int i = 0; i < 400; ++i) {
            const double x = rng.normal() + 0.2 * c;
            chains[c][i] = {x};
            series[c][i] = x;
        }
    }
    const double m = mpsrf(chains);
    const double r = psrf(wrap_series(series), 0);
    const double nn = 400.0;
    const double lhs = m * m - (nn - 1.0) / nn;
    const double rhs = (3.0 + 1.0) / 3.0 * (r * r - (nn - 1.0) / nn);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

    // a coordinate that never moves makes W singular
    std::vector<std::vector<std::vector<double>>> degenerate(2);
    for (auto& c : degenerate) {
        c.resize(100);
        for (auto& row : c) row = {rng.normal(), 1.0};
    }
    CHECK_THROWS_AS(mpsrf(degenerate), ConvergenceError);
}

TEST_CASE("summarize: constant draws and order statistics") {
    std::vector<double> constant(40, 3.25);
    const auto s1 = summarize(wrap_series({constant, constant}));
    CHECK(s1[0].mean == 3.25);
    CHECK(s1[0].sd == 0.0);
    CHECK(s1[0].q2_5 == 3.25);
    CHECK(s1[0].q50 == 3.25);
    CHECK(s1[0].q97_5 == 3.25);

    // pooled draws 1..100 reproduce the type-7 quantile arithmetic
    std::vector<double> a(50), b(50);
    std::iota(a.begin(), a.end(), 1.0);
    std::iota(b.begin(), b.end(), 51.0);
    const auto s2 = summarize(wrap_series({a, b}));
    CHECK(s2[0].q2_5 == doctest::Approx(3.475).epsilon(1e-12));
    CHECK(s2[0].q50 == doctest::Approx(50.5).epsilon(1e-12));
    CHECK(s2[0].mean == doctest::Approx(50.5).epsilon(1e-12));
}

TEST_CASE("detailed balance smoke test on a standard normal target") {
    const LogTarget target = [](const std::vector<double>& x) { return -0.5 * x[0] * x[0]; };
    RwmOptions opts;
    opts.burn_in = 2000;
    opts.total_iterations = 42000;
    opts.thin = 1;
    opts.target_accept = 0.30;
    Rng rng(89);
    const auto res = run_adaptive_rwm(target, {0.0}, opts, rng);
    REQUIRE(res.draws.size() == 40000);

    std::vector<double> xs;
    xs.reserve(res.draws.size());
    for (const auto& d : res.draws) xs.push_back(d[0]);
    const double m = mean(xs);
    const double v = sample_variance(xs);

    // integrated autocorrelation time via Geyer pairs for the ESS bound
    double gamma0 = 0.0;
    for (double x : xs) gamma0 += (x - m) * (x - m);
    gamma0 /= static_cast<double>(xs.size());
    double tau = 1.0;
    for (size_t k = 1; k + 1 < 2000; k += 2) {
        double g1 = 0.0, g2 = 0.0;
        for (size_t i = 0; i + k + 1 < xs.size(); ++i) {
            g1 += (xs[i] - m) * (xs[i + k] - m);
            g2 += (xs[i] - m) * (xs[i + k + 1] - m);
        }
        const double pair = (g1 + g2) / (static_cast<double>(xs.size()) * gamma0);
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    const double ess_est = static_cast<double>(xs.size()) / tau;
    CHECK(std::fabs(m) < 4.0 * std::sqrt(v) / std::sqrt(ess_est));
    CHECK(v > 0.9);
    CHECK(v < 1.1);
}

TEST_CASE("proposal step sizes freeze after burn-in") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.n_chains = 2;
    cfg.burn_in = 1000;
    cfg.total_iterations = 3000;
    cfg.record_step_trace = true;
    const auto samples = run_chains(tri, cfg);
    REQUIRE(samples.step_trace.size() == 2);
    for (size_t c = 0; c < 2; ++c) {
        const auto& trace = samples.step_trace[c];
        REQUIRE(trace.size() == 60); // one record per 50-iteration batch
        const auto& frozen = trace[19]; // last burn-in batch
        for (size_t b = 20; b < trace.size(); ++b) {
            REQUIRE(trace[b] == frozen);
        }
        CHECK(samples.final_log_steps[c] == frozen);
    }
}

TEST_CASE("post burn-in acceptance rates land near the target") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.burn_in = 4000;
    cfg.total_iterations = 8000;
    cfg.thin = 10;
    const auto samples = run_chains(tri, cfg);
    for (int j = 0; j < ModelParams::dim; ++j) {
        CHECK(samples.accept_rates[j] > 0.10);
        CHECK(samples.accept_rates[j] < 0.60);
    }
}

TEST_CASE("config validation and error paths") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.total_iterations = cfg.burn_in;
    CHECK_THROWS_AS(run_chains(tri, cfg), InputError);
    cfg = quick_config();
    cfg.thin = 0;
    CHECK_THROWS_AS(run_chains(tri, cfg), InputError);
    cfg = quick_config();
    cfg.init = InitMode::UserSupplied;
    CHECK_THROWS_AS(run_chains(tri, cfg), InputError); // missing init params

    // empty mask
    const ReportingTriangle empty({2018, 1}, 1, 2, {{3, -1}});
    CHECK_THROWS_AS(run_chains(empty, quick_config()), InputError);
}

TEST_CASE("user-supplied initialization is honored") {
    const auto tri = small_triangle();
    ChainConfig cfg = quick_config();
    cfg.init = InitMode::UserSupplied;
    ModelParams init;
    init.alpha = {-1.0, 0.0, 0.5};
    init.beta = {1.0, 0.0, -1.0};
    cfg.init_params = init;
    const auto samples = run_chains(tri, cfg);
    CHECK(samples.draws_per_chain() == 100);

    ModelParams bad = init;
    bad.sigma_alpha[0] = 0.0;
    cfg.init_params = bad;
    CHECK_THROWS_AS(run_chains(tri, cfg), InputError);
}

TEST_CASE("presets carry the documented settings") {
    const auto desk = ChainConfig::desk();
    CHECK(desk.n_chains == 3);
    CHECK(desk.burn_in == 20000);
    CHECK(desk.total_iterations == 50000);
    CHECK(desk.thin == 10);
    const auto paper = ChainConfig::paper_scale();
    CHECK(paper.n_chains == 3);
    CHECK(paper.burn_in == 1000000);
    CHECK(paper.total_iterations == 1100000);
    CHECK(paper.thin == 100);
}
