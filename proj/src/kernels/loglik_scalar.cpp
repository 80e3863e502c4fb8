#include "ibnr/kernels/loglik.hpp"

#include <cmath>
#include <limits>

#include "ibnr/kernels/lgamma.hpp"

namespace ibnr::kernels {

void LoglikGrid::push_cell(double k, double t, double dfrac) {
    count.push_back(k);
    lgamma_k1.push_back(lgamma_lanczos(k + 1.0));
    time.push_back(t);
    delay_frac.push_back(dfrac);
}

double loglik_scalar(const LoglikGrid& grid, const LinkCoeffs& c) {
    double total = 0.0;
    const size_t n = grid.size();
    for (size_t i = 0; i < n; ++i) {
        const double t = grid.time[i];
        const double df = grid.delay_frac[i];
        const double k = grid.count[i];

        const double eta_p = c.a0 + c.a1 * t + c.a2 * df;
        const double eta_r = c.b0 + c.b1 * t + c.b2 * df;
        if (std::fabs(eta_r) > kMaxLogR) return -std::numeric_limits<double>::infinity();

        const double r = std::exp(eta_r);
        const double log_p = -softplus(-eta_p);
        const double log_1mp = -softplus(eta_p);

        total += lgamma_diff(k, r) - grid.lgamma_k1[i] + r * log_p + k * log_1mp;
    }
    return total;
}

} // namespace ibnr::kernels
