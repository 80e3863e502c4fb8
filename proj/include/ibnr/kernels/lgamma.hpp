#pragma once

namespace ibnr::kernels {

/// log Gamma(x) for x > 0 via the Lanczos approximation (g = 7, 9 terms),
/// shifted by one recurrence step below x = 0.5. Good to ~1e-13 relative
/// over the range the model touches; the SIMD kernel evaluates the same
/// series so the two lanes agree tightly.
double lgamma_lanczos(double x);

/// lgamma(k + r) - lgamma(r) for k >= 0, r > 0. Naive subtraction loses all
/// precision once r is large (the NB likelihood's Poisson-limit ridge, where
/// corrupted values would fake posterior modes), so beyond r = 1e8 this
/// switches to a Stirling-form expansion of the difference.
double lgamma_diff(double k, double r);

/// log(1 + exp(x)) without overflow at either end.
double softplus(double x);

/// logistic sigmoid 1 / (1 + exp(-x)).
double sigmoid(double x);

} // namespace ibnr::kernels
