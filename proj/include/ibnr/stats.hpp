#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ibnr {

/// Quantile by linear interpolation of order statistics (the "type 7" rule:
/// h = (n-1)p on the sorted sample). Even-length medians are midpoint
/// averages, which is how half-integer count nowcasts arise.
double quantile(std::span<const double> sorted_values, double p);

/// Convenience: copies, sorts, interpolates.
double quantile_of(std::vector<double> values, double p);

double mean(std::span<const double> xs);

/// Unbiased sample variance (n-1 denominator).
double sample_variance(std::span<const double> xs);

/// Regularized lower incomplete gamma P(a, x); series for x < a+1,
/// continued fraction otherwise.
double regularized_gamma_p(double a, double x);

/// Chi-square CDF with `dof` degrees of freedom.
double chi_square_cdf(double x, double dof);

struct GofResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Pearson chi-square goodness-of-fit of observed bin counts against expected
/// bin counts (same total). Bins with tiny expectation should be lumped by
/// the caller first.
GofResult chi_square_gof(std::span<const double> observed, std::span<const double> expected);

} // namespace ibnr
