#include "ibnr/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ibnr/common.hpp"
#include "ibnr/rng.hpp"
#include "ibnr/stats.hpp"

namespace ibnr {

namespace {

struct ObservedCumulative {
    std::vector<int> rows;
    std::vector<int> last_observed;              // l_t = min(D, T - t)
    std::vector<std::vector<double>> cumulative; // observed prefix only
    int max_delay = 0;
};

ObservedCumulative observed_cumulative(const ReportingTriangle& tri) {
    ObservedCumulative oc;
    oc.max_delay = tri.max_delay();
    oc.rows = tri.projectable_rows();
    if (oc.rows.empty()) throw InputError("triangle has no observed rows");
    for (int t : oc.rows) {
        const int l = std::min(tri.max_delay(), tri.present() - t);
        oc.last_observed.push_back(l);
        std::vector<double> cum(l);
        long run = 0;
        for (int d = 1; d <= l; ++d) {
            run += tri.observed_count(t, d);
            cum[d - 1] = static_cast<double>(run);
        }
        oc.cumulative.push_back(std::move(cum));
    }
    return oc;
}

// Volume-weighted development factors over rows observed at both k and k+1.
std::vector<double> estimate_factors(const ObservedCumulative& oc) {
    const int D = oc.max_delay;
    std::vector<double> f(D - 1, 1.0);
    for (int k = 1; k <= D - 1; ++k) {
        double num = 0.0, den = 0.0;
        bool any = false;
        for (size_t i = 0; i < oc.rows.size(); ++i) {
            if (oc.last_observed[i] >= k + 1) {
                num += oc.cumulative[i][k];
                den += oc.cumulative[i][k - 1];
                any = true;
            }
        }
        if (!any) {
            throw InputError("chain_ladder: development step " + std::to_string(k) +
                             " has no origin with both periods observed");
        }
        if (den <= 0.0) {
            throw NumericalError("chain_ladder: zero cumulative volume at development step " +
                                 std::to_string(k));
        }
        f[k - 1] = num / den;
    }
    return f;
}

ChainLadderResult complete_from(const ObservedCumulative& oc, std::vector<double> f) {
    ChainLadderResult res;
    res.rows = oc.rows;
    res.last_observed = oc.last_observed;
    res.factors.f = std::move(f);
    const int D = oc.max_delay;
    for (size_t i = 0; i < oc.rows.size(); ++i) {
        std::vector<double> cum(D);
        const int l = oc.last_observed[i];
        for (int k = 1; k <= l; ++k) cum[k - 1] = oc.cumulative[i][k - 1];
        for (int k = l + 1; k <= D; ++k) cum[k - 1] = cum[k - 2] * res.factors.f[k - 2];
        const double reserve = cum[D - 1] - cum[l - 1];
        res.reserve_by_row.push_back(reserve);
        res.total_reserve += reserve;
        res.cumulative.push_back(std::move(cum));
    }
    return res;
}

} // namespace

ChainLadderResult chain_ladder(const ReportingTriangle& tri) {
    const auto oc = observed_cumulative(tri);
    return complete_from(oc, estimate_factors(oc));
}

MackResult mack(const ReportingTriangle& tri, const MackConfig& cfg) {
    if (cfg.alpha_exponent < 0 || cfg.alpha_exponent > 2) {
        throw InputError("mack: alpha exponent must be 0, 1 or 2");
    }
    const auto oc = observed_cumulative(tri);
    const int D = oc.max_delay;
    const size_t R = oc.rows.size();
    if (R < 3) throw InputError("mack: need at least 3 origins for variance estimation");

    auto weight = [&](size_t i, int k) -> double {
        if (!cfg.weights) return 1.0;
        const auto& w = *cfg.weights;
        if (i >= w.size() || k - 1 >= static_cast<int>(w[i].size())) {
            throw InputError("mack: weight matrix shape mismatch");
        }
        const double v = w[i][k - 1];
        if (v < 0.0 || v > 1.0) throw InputError("mack: weights must lie in [0,1]");
        return v;
    };
    auto s_pow = [&](double s) {
        switch (cfg.alpha_exponent) {
            case 0: return 1.0;
            case 1: return s;
            default: return s * s;
        }
    };

    MackResult res;
    res.sigma2.assign(D - 1, 0.0);

    // weighted factors f_k = sum w S^a F / sum w S^a; with unit weights and
    // a=1 this reduces algebraically to the chain-ladder column ratio, and
    // computing it that way keeps the point completion bit-identical to
    // chain_ladder.
    const bool plain = !cfg.weights && cfg.alpha_exponent == 1;
    std::vector<double> f(D - 1, 1.0);
    std::vector<double> denom_k(D - 1, 0.0); // sum_j w S^a at step k
    for (int k = 1; k <= D - 1; ++k) {
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < R; ++i) {
            if (oc.last_observed[i] < k + 1) continue;
            const double s = oc.cumulative[i][k - 1];
            if (s <= 0.0) {
                throw NumericalError("mack: nonpositive cumulative at origin " +
                                     std::to_string(oc.rows[i]) + " step " + std::to_string(k));
            }
            const double ws = weight(i, k) * s_pow(s);
            num += plain ? oc.cumulative[i][k] : ws * (oc.cumulative[i][k] / s);
            den += ws;
        }
        if (den <= 0.0) {
            throw InputError("mack: development step " + std::to_string(k) +
                             " has no usable origins");
        }
        f[k - 1] = num;
        f[k - 1] /= den;
        denom_k[k - 1] = den;
    }

    // sigma_k^2 = 1/(N_k - 1) sum w S^a (F - f)^2, with Mack's extrapolation
    // min(s4_{D-2}/s2_{D-3}, s2_{D-3}, s2_{D-2}) when the last step has a
    // single ratio.
    for (int k = 1; k <= D - 1; ++k) {
        int n_k = 0;
        double ss = 0.0;
        for (size_t i = 0; i < R; ++i) {
            if (oc.last_observed[i] < k + 1) continue;
            ++n_k;
            const double s = oc.cumulative[i][k - 1];
            const double F = oc.cumulative[i][k] / s;
            const double d = F - f[k - 1];
            ss += weight(i, k) * s_pow(s) * d * d;
        }
        if (n_k >= 2) {
            res.sigma2[k - 1] = ss / (n_k - 1);
        } else if (k == D - 1 && k >= 3) {
            const double s2a = res.sigma2[k - 3]; // sigma^2_{D-3}
            const double s2b = res.sigma2[k - 2]; // sigma^2_{D-2}
            const double extrap = s2a > 0.0 ? s2b * s2b / s2a : 0.0;
            res.sigma2[k - 1] = std::min(extrap, std::min(s2a, s2b));
        } else {
            throw InputError("mack: too few origins to estimate variance at development step " +
                             std::to_string(k));
        }
    }

    res.base = complete_from(oc, f);

    // Reserve standard errors (Mack's mse formulas):
    //   mse_i = U_i^2 sum_k (sigma_k^2/f_k^2) (1/(w S_ik^a) + 1/sum_j w S_jk^a)
    // with projected S for future cells (unit weight), plus the cross term
    // for the total over origins sharing estimated factors.
    const auto& cum = res.base.cumulative;
    std::vector<double> mse(R, 0.0);
    for (size_t i = 0; i < R; ++i) {
        const int l = oc.last_observed[i];
        const double ult = cum[i][D - 1];
        double acc = 0.0;
        for (int k = l; k <= D - 1; ++k) {
            const double s = cum[i][k - 1];
            if (s <= 0.0) continue;
            const double w = k <= l ? weight(i, k) : 1.0;
            const double proc = res.sigma2[k - 1] / (w * s_pow(s));
            const double est = res.sigma2[k - 1] / denom_k[k - 1];
            acc += (proc + est) / (f[k - 1] * f[k - 1]);
        }
        mse[i] = ult * ult * acc;
        res.se_by_row.push_back(std::sqrt(mse[i]));
    }

    double total_mse = 0.0;
    for (size_t i = 0; i < R; ++i) {
        total_mse += mse[i];
        const int l = oc.last_observed[i];
        if (l >= D) continue;
        double later_ult = 0.0;
        for (size_t j = i + 1; j < R; ++j) later_ult += cum[j][D - 1];
        double acc = 0.0;
        for (int k = l; k <= D - 1; ++k) {
            acc += 2.0 * res.sigma2[k - 1] / (f[k - 1] * f[k - 1] * denom_k[k - 1]);
        }
        total_mse += cum[i][D - 1] * later_ult * acc;
    }
    res.total_se = std::sqrt(total_mse);
    return res;
}

namespace {

struct BackfitGrid {
    // fitted incremental means over observed cells, [row][d-1]
    std::vector<std::vector<double>> fitted;
};

// Chain-ladder backfit: anchor each row at its latest observed cumulative,
// walk backwards through the factors, difference into incrementals.
BackfitGrid backfit(const ObservedCumulative& oc, const std::vector<double>& f) {
    BackfitGrid bg;
    for (size_t i = 0; i < oc.rows.size(); ++i) {
        const int l = oc.last_observed[i];
        std::vector<double> cum(l);
        cum[l - 1] = oc.cumulative[i][l - 1];
        for (int k = l - 1; k >= 1; --k) cum[k - 1] = cum[k] / f[k - 1];
        std::vector<double> inc(l);
        inc[0] = cum[0];
        for (int k = 2; k <= l; ++k) inc[k - 1] = cum[k - 1] - cum[k - 2];
        bg.fitted.push_back(std::move(inc));
    }
    return bg;
}

} // namespace

BootstrapResult bootstrap_chain_ladder(const ReportingTriangle& tri, const BootstrapConfig& cfg) {
    if (cfg.n_resamples < 1) throw InputError("bootstrap: need at least one resample");
    const auto oc = observed_cumulative(tri);
    const int D = oc.max_delay;
    const size_t R = oc.rows.size();
    const auto f_hat = estimate_factors(oc);
    const auto bg = backfit(oc, f_hat);

    // scaled Pearson residuals over observed cells with positive fitted mean
    struct CellRef {
        size_t row;
        int d;
    };
    std::vector<CellRef> cells;
    long n_cells = 0;
    for (size_t i = 0; i < R; ++i) {
        for (int d = 1; d <= oc.last_observed[i]; ++d) {
            ++n_cells;
            cells.push_back({i, d});
        }
    }
    const long n_params = static_cast<long>(R) + (D - 1);
    const long dof = n_cells - n_params;
    if (dof <= 0) {
        throw InputError("bootstrap: not enough observed cells for the chain-ladder parameters");
    }

    double pearson_sum = 0.0;
    std::vector<double> pool;
    for (const auto& c : cells) {
        const double m = bg.fitted[c.row][c.d - 1];
        const double inc = c.d == 1 ? oc.cumulative[c.row][0]
                                    : oc.cumulative[c.row][c.d - 1] - oc.cumulative[c.row][c.d - 2];
        if (m <= 0.0) continue;
        const double r = (inc - m) / std::sqrt(m);
        pearson_sum += r * r;
        pool.push_back(r);
    }
    const double phi = pearson_sum / static_cast<double>(dof);
    const double adj = std::sqrt(static_cast<double>(n_cells) / static_cast<double>(dof));
    for (auto& r : pool) r *= adj;

    BootstrapResult res;
    res.n_resamples = cfg.n_resamples;
    res.rows = oc.rows;
    res.dispersion = phi;
    res.reserve_draws.assign(cfg.n_resamples, std::vector<double>(R, 0.0));
    res.total_draws.assign(cfg.n_resamples, 0.0);

    for (int b = 0; b < cfg.n_resamples; ++b) {
        Rng rng = Rng::stream(cfg.seed, static_cast<uint64_t>(b));
        bool done = false;
        for (int attempt = 0; attempt <= cfg.max_retries && !done; ++attempt) {
            // stage 1: pseudo-triangle from resampled residuals, refit, project
            ObservedCumulative pseudo = oc;
            for (size_t ci = 0; ci < cells.size(); ++ci) {
                const auto& c = cells[ci];
                const double m = bg.fitted[c.row][c.d - 1];
                double rstar = 0.0;
                if (cfg.resample_residuals && !pool.empty()) {
                    rstar = pool[static_cast<size_t>(rng.uniform01() * pool.size())];
                }
                const double inc = m + rstar * std::sqrt(std::max(m, 0.0));
                pseudo.cumulative[c.row][c.d - 1] =
                    c.d == 1 ? inc : pseudo.cumulative[c.row][c.d - 2] + inc;
            }

            std::vector<double> f_star;
            try {
                f_star = estimate_factors(pseudo);
            } catch (const NumericalError&) {
                continue; // degenerate resample, redraw
            }

            // future incremental means from the pseudo latest diagonal
            std::vector<std::vector<double>> mu(R);
            bool valid = true;
            for (size_t i = 0; i < R && valid; ++i) {
                const int l = pseudo.last_observed[i];
                double cum = pseudo.cumulative[i][l - 1];
                for (int k = l + 1; k <= D; ++k) {
                    const double next = cum * f_star[k - 2];
                    const double m = next - cum;
                    if (m < 0.0) {
                        valid = false;
                        break;
                    }
                    mu[i].push_back(m);
                    cum = next;
                }
            }
            if (!valid) continue;

            // stage 2: process error around the projected means
            double total = 0.0;
            for (size_t i = 0; i < R; ++i) {
                double reserve = 0.0;
                for (double m : mu[i]) {
                    double v = m;
                    if (cfg.process_error && m > 0.0 && phi > 0.0) {
                        v = std::round(rng.gamma(m / phi, phi));
                    }
                    reserve += v;
                }
                res.reserve_draws[b][i] = reserve;
                total += reserve;
            }
            res.total_draws[b] = total;
            done = true;
        }
        if (!done) {
            throw NumericalError("bootstrap: resample " + std::to_string(b) +
                                 " kept producing nonpositive fitted means after " +
                                 std::to_string(cfg.max_retries) + " retries");
        }
    }

    for (size_t i = 0; i < R; ++i) {
        std::vector<double> col(cfg.n_resamples);
        for (int b = 0; b < cfg.n_resamples; ++b) col[b] = res.reserve_draws[b][i];
        res.point_reserve_by_row.push_back(quantile_of(std::move(col), 0.5));
    }
    res.point_total_reserve = quantile_of(res.total_draws, 0.5);
    return res;
}

GlmFit odp_glm(const ReportingTriangle& tri) {
    const auto oc = observed_cumulative(tri);
    const int D = oc.max_delay;
    const size_t R = oc.rows.size();

    // responses: observed incrementals
    struct Obs {
        size_t row;
        int d;
        double y;
    };
    std::vector<Obs> obs;
    std::vector<double> row_tot(R, 0.0), col_tot(D, 0.0);
    for (size_t i = 0; i < R; ++i) {
        for (int d = 1; d <= oc.last_observed[i]; ++d) {
            const double inc = d == 1 ? oc.cumulative[i][0]
                                      : oc.cumulative[i][d - 1] - oc.cumulative[i][d - 2];
            obs.push_back({i, d, inc});
            row_tot[i] += inc;
            col_tot[d - 1] += inc;
        }
    }
    for (size_t i = 0; i < R; ++i) {
        if (row_tot[i] <= 0.0) {
            throw InputError("odp_glm: origin row " + std::to_string(oc.rows[i]) +
                             " has zero observed total (aliased origin level)");
        }
    }
    for (int d = 1; d <= D; ++d) {
        if (col_tot[d - 1] <= 0.0) {
            throw InputError("odp_glm: development period " + std::to_string(d) +
                             " has zero observed total (aliased development level)");
        }
    }

    const long n = static_cast<long>(obs.size());
    const long p = 1 + (static_cast<long>(R) - 1) + (D - 1);
    if (n <= p) {
        throw InputError("odp_glm: design matrix rank deficient (" + std::to_string(n) +
                         " cells for " + std::to_string(p) + " parameters)");
    }

    // design: intercept, origin effects 2..R, development effects 2..D
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd y(n);
    for (long c = 0; c < n; ++c) {
        const auto& o = obs[c];
        x(c, 0) = 1.0;
        if (o.row >= 1) x(c, 1 + static_cast<long>(o.row) - 1) = 1.0;
        if (o.d >= 2) x(c, static_cast<long>(R) + o.d - 2) = 1.0;
        y(c) = o.y;
    }

    {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < p) {
            const auto perm = qr.colsPermutation().indices();
            const long aliased = perm(p - 1);
            std::string which =
                aliased == 0
                    ? "intercept"
                    : aliased < static_cast<long>(R)
                          ? "origin " + std::to_string(oc.rows[static_cast<size_t>(aliased)])
                          : "development " + std::to_string(aliased - static_cast<long>(R) + 2);
            throw InputError("odp_glm: design matrix rank deficient (aliased level: " + which +
                             ")");
        }
    }

    // IRLS for the quasi-Poisson log link
    Eigen::VectorXd eta(n), mu(n);
    for (long c = 0; c < n; ++c) mu(c) = y(c) + 0.5;
    eta = mu.array().log();

    auto deviance_of = [&](const Eigen::VectorXd& m) {
        double dev = 0.0;
        for (long c = 0; c < n; ++c) {
            const double yi = y(c);
            const double mi = m(c);
            if (yi > 0.0) dev += yi * std::log(yi / mi) - (yi - mi);
            else dev += mi;
        }
        return 2.0 * dev;
    };

    double dev = deviance_of(mu);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(p);
    int iter = 0;
    bool converged = false;
    std::ostringstream trail;
    for (; iter < 100; ++iter) {
        const Eigen::VectorXd wgt = mu;
        const Eigen::VectorXd z = eta.array() + (y - mu).array() / mu.array();
        const Eigen::MatrixXd xw = x.array().colwise() * wgt.array();
        const Eigen::MatrixXd a = xw.transpose() * x;
        const Eigen::VectorXd rhs = xw.transpose() * z;
        coef = a.ldlt().solve(rhs);
        eta = (x * coef).cwiseMax(-300.0).cwiseMin(300.0);
        mu = eta.array().exp();
        const double dev_new = deviance_of(mu);
        trail << (iter ? " -> " : "") << dev_new;
        if (std::abs(dev_new - dev) <= 1e-8 * std::max(1.0, std::abs(dev_new))) {
            dev = dev_new;
            converged = true;
            ++iter;
            break;
        }
        dev = dev_new;
    }
    if (!converged) {
        throw NumericalError("odp_glm: IRLS did not converge in 100 iterations (deviance " +
                             trail.str() + ")");
    }

    GlmFit fit;
    fit.rows = oc.rows;
    fit.iterations = iter;
    fit.deviance = dev;
    fit.intercept = coef(0);
    fit.origin_effects.assign(R, 0.0);
    for (size_t i = 1; i < R; ++i) fit.origin_effects[i] = coef(1 + static_cast<long>(i) - 1);
    fit.dev_effects.assign(D, 0.0);
    for (int d = 2; d <= D; ++d) fit.dev_effects[d - 1] = coef(static_cast<long>(R) + d - 2);

    double pearson = 0.0;
    for (long c = 0; c < n; ++c) {
        const double d = y(c) - mu(c);
        pearson += d * d / mu(c);
    }
    fit.dispersion = pearson / static_cast<double>(n - p);

    for (size_t i = 0; i < R; ++i) {
        std::vector<double> means(D);
        double reserve = 0.0;
        for (int d = 1; d <= D; ++d) {
            means[d - 1] = std::exp(fit.intercept + fit.origin_effects[i] + fit.dev_effects[d - 1]);
            if (d > oc.last_observed[i]) reserve += means[d - 1];
        }
        fit.fitted.push_back(std::move(means));
        fit.reserve_by_row.push_back(reserve);
        fit.total_reserve += reserve;
    }
    return fit;
}

} // namespace ibnr
