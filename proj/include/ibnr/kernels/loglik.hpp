#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace ibnr::kernels {

/// Regression coefficients of the two linked predictors, in the order the
/// grid kernel consumes them.
struct LinkCoeffs {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0; // logit(p) = a0 + a1*t + a2*d/D
    double b0 = 0.0, b1 = 0.0, b2 = 0.0; // log(r)   = b0 + b1*t + b2*d/D
};

/// Observed cells of a reporting triangle flattened into parallel arrays,
/// ready for the negative-binomial log-likelihood kernels. lgamma(k+1) is
/// hoisted here because it does not depend on the parameters.
struct LoglikGrid {
    std::vector<double> count;      // n_{t,d}
    std::vector<double> lgamma_k1;  // lgamma(n_{t,d} + 1)
    std::vector<double> time;       // t
    std::vector<double> delay_frac; // d/D

    size_t size() const { return count.size(); }
    void push_cell(double k, double t, double dfrac);
};

/// Linear predictors above this are treated as an invalid state: exp() would
/// be on the edge of overflow and lgamma differences degenerate, so the
/// kernels return -infinity and the sampler rejects.
constexpr double kMaxLogR = 700.0;

/// Scalar reference kernel. Sum over cells of
///   lgamma(k+r) - lgamma(r) - lgamma(k+1) + r*log(p) + k*log(1-p)
/// with p, r from the linked predictors.
double loglik_scalar(const LoglikGrid& grid, const LinkCoeffs& c);

#if defined(IBNR_BUILD_AVX2)
/// AVX2 variant of loglik_scalar; 4 cells per iteration, same Lanczos series.
double loglik_avx2(const LoglikGrid& grid, const LinkCoeffs& c);

// Element-wise hooks for the equivalence tests (guarded by avx2_available()).
void avx2_exp4(const double in[4], double out[4]);
void avx2_log4(const double in[4], double out[4]);
void avx2_log1p4(const double in[4], double out[4]);
void avx2_lgamma4(const double in[4], double out[4]);
#endif

using LoglikFn = double (*)(const LoglikGrid&, const LinkCoeffs&);

enum class SimdMode { Auto, Scalar, Avx2 };

/// Pick the kernel: Auto honors the IBNR_SIMD environment variable
/// ("scalar" / "avx2" / "auto") and otherwise uses cpuid.
LoglikFn select_loglik_kernel(SimdMode mode = SimdMode::Auto);

/// Name of the kernel Auto would select ("avx2" or "scalar").
std::string active_kernel_name();

/// True when this build carries the AVX2 kernel and the CPU supports it.
bool avx2_available();

} // namespace ibnr::kernels
