#pragma once

#include <array>
#include <cstddef>

#include "ibnr/kernels/loglik.hpp"
#include "ibnr/triangle.hpp"

namespace ibnr {

/// The 12-dimensional parameter vector: three logit-link coefficients, three
/// log-link coefficients and their six prior scales.
struct ModelParams {
    std::array<double, 3> alpha{};        // logit(p) = alpha0 + alpha1*t + alpha2*d/D
    std::array<double, 3> beta{};         // log(r)   = beta0 + beta1*t + beta2*d/D
    std::array<double, 3> sigma_alpha{1.0, 1.0, 1.0};
    std::array<double, 3> sigma_beta{1.0, 1.0, 1.0};

    static constexpr int dim = 12;

    std::array<double, dim> flat() const;
    static ModelParams from_flat(const std::array<double, dim>& v);

    kernels::LinkCoeffs link_coeffs() const {
        return {alpha[0], alpha[1], alpha[2], beta[0], beta[1], beta[2]};
    }
};

/// Flat-vector parameter names, in serialization order.
const std::array<const char*, ModelParams::dim>& param_names();

/// Per-cell negative binomial parameters; construction validates the domain.
struct CellParams {
    double p; // success probability in (0,1)
    double r; // size, > 0

    CellParams(double p_, double r_);
};

/// Inverse-logit link for the breach probability. Saturates to the nearest
/// representable values inside (0,1) instead of erroring.
double link_p(const ModelParams& params, int t, int d, int max_delay);

/// Exponential link for the NB size. Throws NumericalError when the linear
/// predictor would overflow exp().
double link_r(const ModelParams& params, int t, int d, int max_delay);

CellParams cell_params(const ModelParams& params, int t, int d, int max_delay);

/// log P(n = k) for NB(p, r):
///   lgamma(k+r) - lgamma(r) - lgamma(k+1) + r*log(p) + k*log(1-p)
/// Mean r(1-p)/p, variance r(1-p)/p^2.
double nb_logpmf(long k, const CellParams& cell);

/// Normal priors on the six coefficients with Exp(1) priors on their scales.
/// -infinity when any scale is nonpositive.
double log_prior(const ModelParams& params);

/// Sum of nb_logpmf over the observed cells of the triangle. Unobserved
/// cells contribute nothing; an empty mask gives 0. States whose log-size
/// predictor leaves the representable range evaluate to -infinity.
double log_likelihood(const ModelParams& params, const ReportingTriangle& tri);

double log_posterior(const ModelParams& params, const ReportingTriangle& tri);

/// Flatten the observed cells for the grid kernels used by the sampler.
kernels::LoglikGrid build_loglik_grid(const ReportingTriangle& tri);

} // namespace ibnr
