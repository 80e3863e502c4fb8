#include <doctest.h>

#include <cmath>
#include <vector>

#include "ibnr/baselines.hpp"
#include "ibnr/common.hpp"
#include "ibnr/synth.hpp"

using namespace ibnr;

namespace {

// incremental counts for the cumulative hand triangle [[10,15],[20,.]]
ReportingTriangle hand_triangle() {
    return ReportingTriangle({2018, 1}, 3, 2, {{10, 5}, {20, -1}});
}

// rows exactly proportional to one development pattern, staircase mask
ReportingTriangle deterministic_triangle() {
    // incremental pattern (8,4,2,2) scaled by 1..4, cumulative (8,12,14,16)*c
    std::vector<std::vector<long>> counts{
        {8, 4, 2, 2},
        {16, 8, 4, -1},
        {24, 12, -1, -1},
        {32, -1, -1, -1},
    };
    return ReportingTriangle({2018, 1}, 5, 4, counts);
}

ReportingTriangle synthetic_masked(uint64_t seed, int rows = 14, int delays = 5) {
    SynthConfig cfg;
    cfg.t_rows = rows;
    cfg.delays = delays;
    cfg.seed = seed;
    cfg.alpha = {-1.0, -0.005, 0.5};
    cfg.beta = {2.0, 0.01, -1.0};
    return generate(cfg).first.masked_to(rows);
}

} // namespace

TEST_CASE("chain ladder on the 2x2 hand triangle") {
    const auto cl = chain_ladder(hand_triangle());
    REQUIRE(cl.factors.f.size() == 1);
    CHECK(cl.factors.f[0] == 1.5); // 15/10 exactly
    CHECK(cl.cumulative[1][1] == 30.0); // 20 * 1.5
    // reserve = completed ultimate minus latest observed cumulative:
    // 30 - 20 = 10 by direct hand computation
    CHECK(cl.reserve_by_row[1] == 10.0);
    CHECK(cl.reserve_by_row[0] == 0.0);
    CHECK(cl.total_reserve == 10.0);
}

TEST_CASE("chain ladder on a fully observed triangle reserves nothing") {
    const ReportingTriangle tri({2018, 1}, 5, 2, {{10, 5}, {20, 7}, {3, 1}});
    const auto cl = chain_ladder(tri);
    CHECK(cl.total_reserve == 0.0);
    for (double r : cl.reserve_by_row) CHECK(r == 0.0);
    for (size_t i = 0; i < cl.rows.size(); ++i) {
        CHECK(cl.cumulative[i][1] ==
              static_cast<double>(tri.count(cl.rows[i], 1) + tri.count(cl.rows[i], 2)));
    }
}

TEST_CASE("identical development patterns reproduce the common ratios exactly") {
    const auto cl = chain_ladder(deterministic_triangle());
    REQUIRE(cl.factors.f.size() == 3);
    CHECK(cl.factors.f[0] == 1.5);        // 12/8
    CHECK(cl.factors.f[1] == 14.0 / 12.0);
    CHECK(cl.factors.f[2] == 16.0 / 14.0);
    // completions land exactly on the pattern
    CHECK(cl.cumulative[3][3] == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(cl.cumulative[2][3] == doctest::Approx(48.0).epsilon(1e-12));
}

TEST_CASE("chain ladder is scale-equivariant") {
    const auto tri = synthetic_masked(7);
    const auto cl1 = chain_ladder(tri);

    std::vector<std::vector<long>> scaled(tri.n_rows(), std::vector<long>(tri.max_delay(), -1));
    for (int t = 1; t <= tri.n_rows(); ++t) {
        for (int d = 1; d <= tri.max_delay(); ++d) {
            if (tri.known(t, d)) scaled[t - 1][d - 1] = 3 * tri.count(t, d);
        }
    }
    const ReportingTriangle tri3({2018, 1}, tri.present(), tri.max_delay(), scaled);
    const auto cl3 = chain_ladder(tri3);
    for (size_t k = 0; k < cl1.factors.f.size(); ++k) {
        CHECK(cl3.factors.f[k] == doctest::Approx(cl1.factors.f[k]).epsilon(1e-14));
    }
    CHECK(cl3.total_reserve == doctest::Approx(3.0 * cl1.total_reserve).epsilon(1e-12));
}

TEST_CASE("chain ladder error paths") {
    // zero column volume
    const ReportingTriangle zeros({2018, 1}, 4, 3, {{0, 0, 0}, {0, 0, -1}, {0, -1, -1}});
    CHECK_THROWS_AS(chain_ladder(zeros), NumericalError);
}

TEST_CASE("mack variance parameters match a brute-force computation") {
    // hand 4x3 triangle, alpha=1, unit weights
    const ReportingTriangle tri({2018, 1}, 5, 3,
                                {{10, 6, 3}, {12, 8, 4}, {9, 5, -1}, {11, -1, -1}});
    const auto mk = mack(tri);

    // brute force: cumulative rows
    const std::vector<std::vector<double>> s{{10, 16, 19}, {12, 20, 24}, {9, 14, -1}, {11, -1, -1}};
    for (int k = 1; k <= 2; ++k) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (s[i][k] < 0.0) continue;
            num += s[i][k];
            den += s[i][k - 1];
        }
        const double fk = num / den;
        double ss = 0.0;
        int n = 0;
        for (int i = 0; i < 4; ++i) {
            if (s[i][k] < 0.0) continue;
            const double F = s[i][k] / s[i][k - 1];
            ss += s[i][k - 1] * (F - fk) * (F - fk);
            ++n;
        }
        const double sigma2 = ss / (n - 1);
        CHECK(mk.sigma2[k - 1] == doctest::Approx(sigma2).epsilon(1e-12));
        CHECK(mk.base.factors.f[k - 1] == doctest::Approx(fk).epsilon(1e-14));
    }
    for (double se : mk.se_by_row) CHECK(se >= 0.0);
    CHECK(mk.total_se >= 0.0);
}

TEST_CASE("mack on a deterministic triangle: zero variances and zero errors") {
    const auto mk = mack(deterministic_triangle());
    for (double s2 : mk.sigma2) CHECK(s2 == 0.0);
    for (double se : mk.se_by_row) CHECK(se == 0.0);
    CHECK(mk.total_se == 0.0);
}

TEST_CASE("mack point completion is identical to chain ladder") {
    for (uint64_t seed : {11u, 12u, 13u}) {
        const auto tri = synthetic_masked(seed);
        const auto cl = chain_ladder(tri);
        const auto mk = mack(tri);
        REQUIRE(mk.base.rows == cl.rows);
        for (size_t i = 0; i < cl.rows.size(); ++i) {
            for (int k = 0; k < tri.max_delay(); ++k) {
                REQUIRE(mk.base.cumulative[i][k] == cl.cumulative[i][k]); // bitwise
            }
        }
        CHECK(mk.base.total_reserve == cl.total_reserve);
    }
}

TEST_CASE("mack validates its configuration and origin counts") {
    CHECK_THROWS_AS(mack(hand_triangle()), InputError); // < 3 origins
    const auto tri = synthetic_masked(17);
    MackConfig cfg;
    cfg.alpha_exponent = 3;
    CHECK_THROWS_AS(mack(tri, cfg), InputError);
    cfg.alpha_exponent = 0;
    CHECK_NOTHROW(mack(tri, cfg));
    cfg.alpha_exponent = 2;
    CHECK_NOTHROW(mack(tri, cfg));
    // out-of-range weights
    cfg.alpha_exponent = 1;
    cfg.weights = std::vector<std::vector<double>>(
        tri.n_rows(), std::vector<double>(tri.max_delay() - 1, 1.5));
    CHECK_THROWS_AS(mack(tri, cfg), InputError);
}

TEST_CASE("bootstrap: zero residuals with the process stage off reproduce chain ladder") {
    const auto tri = deterministic_triangle();
    const auto cl = chain_ladder(tri);
    BootstrapConfig cfg;
    cfg.n_resamples = 200;
    cfg.seed = 31;
    cfg.process_error = false;
    const auto bs = bootstrap_chain_ladder(tri, cfg);
    CHECK(bs.dispersion == doctest::Approx(0.0));
    for (const auto& draw : bs.reserve_draws) {
        double total = 0.0;
        for (size_t i = 0; i < draw.size(); ++i) {
            CHECK(draw[i] == doctest::Approx(cl.reserve_by_row[i]).epsilon(1e-9));
            total += draw[i];
        }
        CHECK(total == doctest::Approx(cl.total_reserve).epsilon(1e-9));
    }
    CHECK(bs.point_total_reserve == doctest::Approx(cl.total_reserve).epsilon(1e-9));
}

TEST_CASE("bootstrap: suppressed resampling leaves the chain-ladder mean plus process noise") {
    const auto tri = synthetic_masked(37);
    const auto cl = chain_ladder(tri);
    BootstrapConfig cfg;
    cfg.n_resamples = 1;
    cfg.seed = 41;
    cfg.resample_residuals = false;
    const auto bs = bootstrap_chain_ladder(tri, cfg);
    REQUIRE(bs.reserve_draws.size() == 1);
    // one process draw around the chain-ladder projection
    for (size_t i = 0; i < bs.rows.size(); ++i) {
        CHECK(bs.reserve_draws[0][i] >= 0.0);
    }
    // with the process stage also off the draw is the chain-ladder reserve
    cfg.process_error = false;
    const auto bs2 = bootstrap_chain_ladder(tri, cfg);
    for (size_t i = 0; i < bs2.rows.size(); ++i) {
        CHECK(bs2.reserve_draws[0][i] == doctest::Approx(cl.reserve_by_row[i]).epsilon(1e-9));
    }
}

TEST_CASE("bootstrap is deterministic in its seed") {
    const auto tri = synthetic_masked(43);
    BootstrapConfig cfg;
    cfg.n_resamples = 50;
    cfg.seed = 47;
    const auto a = bootstrap_chain_ladder(tri, cfg);
    const auto b = bootstrap_chain_ladder(tri, cfg);
    REQUIRE(a.total_draws.size() == b.total_draws.size());
    for (size_t i = 0; i < a.total_draws.size(); ++i) {
        REQUIRE(a.total_draws[i] == b.total_draws[i]); // bitwise
    }
    CHECK(a.point_total_reserve == b.point_total_reserve);

    cfg.seed = 48;
    const auto c = bootstrap_chain_ladder(tri, cfg);
    bool differs = false;
    for (size_t i = 0; i < a.total_draws.size() && !differs; ++i) {
        differs = a.total_draws[i] != c.total_draws[i];
    }
    CHECK(differs);
}

TEST_CASE("odp glm recovers exact log-additive effects") {
    // means 16 * oi * dk with integer values; Poisson MLE must reproduce them
    const std::vector<double> oi{1.0, 2.0, 0.5, 4.0};
    const std::vector<double> dk{1.0, 0.5, 0.25};
    std::vector<std::vector<long>> counts(4, std::vector<long>(3, -1));
    // staircase: l_t = min(3, 5-t) -> 3,3,2,1
    const std::vector<int> last{3, 3, 2, 1};
    for (int t = 1; t <= 4; ++t) {
        for (int d = 1; d <= last[t - 1]; ++d) {
            counts[t - 1][d - 1] = static_cast<long>(16.0 * oi[t - 1] * dk[d - 1]);
        }
    }
    const ReportingTriangle tri({2018, 1}, 5, 3, counts);
    const auto fit = odp_glm(tri);
    CHECK(fit.origin_effects[0] == 0.0); // identifiability anchors hold exactly
    CHECK(fit.dev_effects[0] == 0.0);
    CHECK(fit.intercept == doctest::Approx(std::log(16.0)).epsilon(1e-6));
    for (int i = 1; i < 4; ++i) {
        CHECK(fit.origin_effects[i] == doctest::Approx(std::log(oi[i])).epsilon(1e-6));
    }
    for (int k = 1; k < 3; ++k) {
        CHECK(fit.dev_effects[k] == doctest::Approx(std::log(dk[k])).epsilon(1e-6));
    }
    for (int t = 1; t <= 4; ++t) {
        for (int d = 1; d <= 3; ++d) {
            CHECK(fit.fitted[t - 1][d - 1] ==
                  doctest::Approx(16.0 * oi[t - 1] * dk[d - 1]).epsilon(1e-6));
        }
    }
}

TEST_CASE("odp glm total reserve equals chain ladder on trapezoid masks") {
    for (uint64_t seed : {53u, 54u, 55u, 56u}) {
        const auto tri = synthetic_masked(seed, 12, 4);
        const auto cl = chain_ladder(tri);
        const auto glm = odp_glm(tri);
        REQUIRE(cl.total_reserve > 0.0);
        CHECK(std::fabs(glm.total_reserve - cl.total_reserve) <= 1e-6 * cl.total_reserve);
    }
}

TEST_CASE("odp glm rejects degenerate designs") {
    // one observed cell per row: origin and development effects are aliased
    const ReportingTriangle tri({2018, 1}, 3, 2, {{5, 3}, {4, -1}});
    CHECK_THROWS_AS(odp_glm(tri), InputError);

    // an all-zero origin row cannot be fitted on the log scale
    const ReportingTriangle zero_row({2018, 1}, 5, 3,
                                     {{10, 6, 3}, {0, 0, 0}, {9, 5, -1}, {11, -1, -1}});
    CHECK_THROWS_AS(odp_glm(zero_row), InputError);
}

TEST_CASE("development factors stay at or above one for nonnegative increments") {
    for (uint64_t seed : {61u, 62u}) {
        const auto tri = synthetic_masked(seed);
        const auto cl = chain_ladder(tri);
        for (double f : cl.factors.f) CHECK(f >= 1.0);
    }
}
