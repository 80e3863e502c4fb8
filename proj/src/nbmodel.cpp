#include "ibnr/nbmodel.hpp"

#include <cmath>
#include <limits>

#include "ibnr/common.hpp"
#include "ibnr/kernels/lgamma.hpp"

namespace ibnr {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLog2Pi = 0.91893853320467274178;
} // namespace

std::array<double, ModelParams::dim> ModelParams::flat() const {
    return {alpha[0],       alpha[1],       alpha[2],       beta[0],       beta[1],
            beta[2],        sigma_alpha[0], sigma_alpha[1], sigma_alpha[2], sigma_beta[0],
            sigma_beta[1],  sigma_beta[2]};
}

ModelParams ModelParams::from_flat(const std::array<double, dim>& v) {
    ModelParams p;
    p.alpha = {v[0], v[1], v[2]};
    p.beta = {v[3], v[4], v[5]};
    p.sigma_alpha = {v[6], v[7], v[8]};
    p.sigma_beta = {v[9], v[10], v[11]};
    return p;
}

const std::array<const char*, ModelParams::dim>& param_names() {
    static const std::array<const char*, ModelParams::dim> names = {
        "alpha0", "alpha1", "alpha2", "beta0",    "beta1",    "beta2",
        "sigma_a0", "sigma_a1", "sigma_a2", "sigma_b0", "sigma_b1", "sigma_b2"};
    return names;
}

CellParams::CellParams(double p_, double r_) : p(p_), r(r_) {
    if (!(p > 0.0) || !(p < 1.0) || !(r > 0.0) || !std::isfinite(r)) {
        throw NumericalError("invalid NB cell parameters (p=" + std::to_string(p_) +
                             ", r=" + std::to_string(r_) + ")");
    }
}

double link_p(const ModelParams& params, int t, int d, int max_delay) {
    const double eta = params.alpha[0] + params.alpha[1] * t +
                       params.alpha[2] * static_cast<double>(d) / max_delay;
    double p = kernels::sigmoid(eta);
    const double hi = std::nextafter(1.0, 0.0);
    const double lo = std::numeric_limits<double>::min();
    if (p > hi) p = hi;
    if (p < lo) p = lo;
    return p;
}

double link_r(const ModelParams& params, int t, int d, int max_delay) {
    const double eta = params.beta[0] + params.beta[1] * t +
                       params.beta[2] * static_cast<double>(d) / max_delay;
    if (std::fabs(eta) > kernels::kMaxLogR) {
        throw NumericalError("link_r: linear predictor " + std::to_string(eta) +
                             " overflows exp() at (t=" + std::to_string(t) +
                             ", d=" + std::to_string(d) + ")");
    }
    return std::exp(eta);
}

CellParams cell_params(const ModelParams& params, int t, int d, int max_delay) {
    return CellParams(link_p(params, t, d, max_delay), link_r(params, t, d, max_delay));
}

double nb_logpmf(long k, const CellParams& cell) {
    if (k < 0) throw InputError("nb_logpmf needs k >= 0");
    const double kk = static_cast<double>(k);
    return kernels::lgamma_diff(kk, cell.r) - kernels::lgamma_lanczos(kk + 1.0) +
           cell.r * std::log(cell.p) + kk * std::log1p(-cell.p);
}

double log_prior(const ModelParams& params) {
    double lp = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double pairs[2][2] = {{params.alpha[i], params.sigma_alpha[i]},
                                    {params.beta[i], params.sigma_beta[i]}};
        for (const auto& cs : pairs) {
            const double x = cs[0];
            const double s = cs[1];
            if (!(s > 0.0)) return kNegInf;
            const double z = x / s;
            lp += -kHalfLog2Pi - std::log(s) - 0.5 * z * z; // N(x; 0, s^2)
            lp += -s;                                       // Exp(s; 1)
        }
    }
    return lp;
}

kernels::LoglikGrid build_loglik_grid(const ReportingTriangle& tri) {
    kernels::LoglikGrid grid;
    const int D = tri.max_delay();
    for (int t = 1; t <= tri.n_rows(); ++t) {
        for (int d = 1; d <= D; ++d) {
            if (t + d - 1 > tri.present() - 1) break;
            grid.push_cell(static_cast<double>(tri.observed_count(t, d)),
                           static_cast<double>(t), static_cast<double>(d) / D);
        }
    }
    return grid;
}

double log_likelihood(const ModelParams& params, const ReportingTriangle& tri) {
    const auto grid = build_loglik_grid(tri);
    return kernels::loglik_scalar(grid, params.link_coeffs());
}

double log_posterior(const ModelParams& params, const ReportingTriangle& tri) {
    const double prior = log_prior(params);
    if (prior == kNegInf) return kNegInf;
    return prior + log_likelihood(params, tri);
}

} // namespace ibnr
