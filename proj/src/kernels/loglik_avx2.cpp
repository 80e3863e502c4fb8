// AVX2 lane of the negative-binomial grid likelihood. Compiled with
// -mavx2 -mfma in its own object; callers go through select_loglik_kernel,
// which only hands this out when cpuid reports AVX2.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "ibnr/kernels/lgamma.hpp"
#include "ibnr/kernels/loglik.hpp"

namespace ibnr::kernels {

namespace {

inline __m256d abs_pd(__m256d x) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, x);
}

// exp(x) for x in [-708, 709]; Cephes-style range reduction plus rational
// approximation. Inputs below -708 flush to zero; callers keep inputs
// below the overflow threshold.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d underflow = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
    x = _mm256_min_pd(x, _mm256_set1_pd(709.0));

    __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);

    const __m256d z = _mm256_mul_pd(r, r);
    __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(3.02994407707441961300e-2));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(9.99999999999999999910e-1));
    const __m256d px = _mm256_mul_pd(r, p);

    __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.52448340349684104192e-3));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.27265548208155028766e-1));
    q = _mm256_fmadd_pd(q, z, _mm256_set1_pd(2.00000000000000000005e0));

    const __m256d xx = _mm256_div_pd(px, _mm256_sub_pd(q, px));
    __m256d e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), xx, _mm256_set1_pd(1.0));

    // scale by 2^n through the exponent bits
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i pow2 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));

    return _mm256_andnot_pd(underflow, e);
}

// log(x) for x > 0: exponent/mantissa split, then the atanh series
// 2*sum s^(2k+1)/(2k+1) with s = (m-1)/(m+1) on m in (sqrt(1/2), sqrt(2)].
inline __m256d log_pd(__m256d x) {
    const __m256i ix = _mm256_castpd_si256(x);
    const __m256i exp_mask = _mm256_set1_epi64x(0x7FF0000000000000LL);
    const __m256i man_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);

    __m256i e_i = _mm256_srli_epi64(_mm256_and_si256(ix, exp_mask), 52);
    e_i = _mm256_sub_epi64(e_i, _mm256_set1_epi64x(1023));
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(ix, man_mask), one_bits));

    // int64 -> double for |e| < 2^51 (always true here)
    const __m256d magic = _mm256_set1_pd(0x0018000000000000p0); // 2^52 + 2^51
    __m256d e = _mm256_sub_pd(
        _mm256_castsi256_pd(_mm256_add_epi64(e_i, _mm256_castpd_si256(magic))), magic);

    const __m256d sqrt2 = _mm256_set1_pd(1.41421356237309504880);
    const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d z = _mm256_mul_pd(s, s);

    __m256d poly = _mm256_set1_pd(2.0 / 25.0);
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 23.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 21.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 19.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 17.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 15.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 13.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 11.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 9.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 7.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 5.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0 / 3.0));
    poly = _mm256_fmadd_pd(poly, z, _mm256_set1_pd(2.0));
    const __m256d series = _mm256_mul_pd(s, poly);

    const __m256d ln2_hi = _mm256_set1_pd(0.693359375);
    const __m256d ln2_lo = _mm256_set1_pd(-2.121944400546905827679e-4);
    return _mm256_fmadd_pd(e, ln2_hi, _mm256_fmadd_pd(e, ln2_lo, series));
}

// log(1+z) for z in [0, 1]: exact-correction trick log(u) * z / (u - 1).
inline __m256d log1p_pd(__m256d z) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d u = _mm256_add_pd(one, z);
    const __m256d um1 = _mm256_sub_pd(u, one);
    const __m256d exact = _mm256_cmp_pd(um1, _mm256_setzero_pd(), _CMP_EQ_OQ);
    const __m256d denom = _mm256_blendv_pd(um1, one, exact);
    const __m256d corrected = _mm256_div_pd(_mm256_mul_pd(log_pd(u), z), denom);
    return _mm256_blendv_pd(corrected, z, exact);
}

// log(1 + exp(x)) = max(x,0) + log1p(exp(-|x|))
inline __m256d softplus_pd(__m256d x) {
    const __m256d m = _mm256_max_pd(x, _mm256_setzero_pd());
    const __m256d t = exp_pd(_mm256_sub_pd(_mm256_setzero_pd(), abs_pd(x)));
    return _mm256_add_pd(m, log1p_pd(t));
}

// Lanczos lgamma, same g=7 series as the scalar kernel; the one-step
// recurrence for x < 0.5 is applied branch-free.
inline __m256d lgamma_pd(__m256d x) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d small = _mm256_cmp_pd(x, half, _CMP_LT_OQ);
    const __m256d xe = _mm256_add_pd(x, _mm256_and_pd(small, one));

    const __m256d z = _mm256_sub_pd(xe, one);
    __m256d acc = _mm256_set1_pd(0.99999999999980993);
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(676.5203681218851),
                                           _mm256_add_pd(z, _mm256_set1_pd(1.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(-1259.1392167224028),
                                           _mm256_add_pd(z, _mm256_set1_pd(2.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(771.32342877765313),
                                           _mm256_add_pd(z, _mm256_set1_pd(3.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(-176.61502916214059),
                                           _mm256_add_pd(z, _mm256_set1_pd(4.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(12.507343278686905),
                                           _mm256_add_pd(z, _mm256_set1_pd(5.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(-0.13857109526572012),
                                           _mm256_add_pd(z, _mm256_set1_pd(6.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(9.9843695780195716e-6),
                                           _mm256_add_pd(z, _mm256_set1_pd(7.0))));
    acc = _mm256_add_pd(acc, _mm256_div_pd(_mm256_set1_pd(1.5056327351493116e-7),
                                           _mm256_add_pd(z, _mm256_set1_pd(8.0))));

    const __m256d t = _mm256_add_pd(z, _mm256_set1_pd(7.5));
    const __m256d half_log_2pi = _mm256_set1_pd(0.91893853320467274178);
    __m256d core = _mm256_fmadd_pd(_mm256_add_pd(z, half), log_pd(t),
                                   _mm256_sub_pd(half_log_2pi, t));
    core = _mm256_add_pd(core, log_pd(acc));

    // subtract log(x) on the shifted lanes; clamp keeps dead lanes normal
    const __m256d corr = _mm256_and_pd(
        small, log_pd(_mm256_max_pd(x, _mm256_set1_pd(2.2250738585072014e-308))));
    return _mm256_sub_pd(core, corr);
}

// lgamma(k+r) - lgamma(r); direct difference below r = 1e6, Stirling form of
// the difference above it (naive subtraction is pure cancellation noise on
// the Poisson-limit ridge and would fake posterior modes).
inline __m256d lgamma_diff_pd(__m256d k, __m256d r) {
    const __m256d big = _mm256_cmp_pd(r, _mm256_set1_pd(1e6), _CMP_GT_OQ);
    const int mask = _mm256_movemask_pd(big);
    if (mask == 0) {
        return _mm256_sub_pd(lgamma_pd(_mm256_add_pd(k, r)), lgamma_pd(r));
    }
    const __m256d z = _mm256_div_pd(k, r);
    const __m256d rk5 =
        _mm256_sub_pd(_mm256_add_pd(r, k), _mm256_set1_pd(0.5));
    __m256d stir = _mm256_mul_pd(k, log_pd(r));
    stir = _mm256_add_pd(stir, _mm256_sub_pd(_mm256_mul_pd(rk5, log1p_pd(z)), k));
    const __m256d corr = _mm256_div_pd(
        k, _mm256_mul_pd(_mm256_set1_pd(12.0), _mm256_mul_pd(r, _mm256_add_pd(r, k))));
    stir = _mm256_sub_pd(stir, corr);
    if (mask == 0xF) return stir;
    const __m256d direct = _mm256_sub_pd(lgamma_pd(_mm256_add_pd(k, r)), lgamma_pd(r));
    return _mm256_blendv_pd(direct, stir, big);
}

inline double hsum_pd(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

} // namespace

double loglik_avx2(const LoglikGrid& grid, const LinkCoeffs& c) {
    const size_t n = grid.size();
    const size_t nvec = n - n % 4;

    const __m256d a0 = _mm256_set1_pd(c.a0);
    const __m256d a1 = _mm256_set1_pd(c.a1);
    const __m256d a2 = _mm256_set1_pd(c.a2);
    const __m256d b0 = _mm256_set1_pd(c.b0);
    const __m256d b1 = _mm256_set1_pd(c.b1);
    const __m256d b2 = _mm256_set1_pd(c.b2);
    const __m256d max_log_r = _mm256_set1_pd(kMaxLogR);

    __m256d acc = _mm256_setzero_pd();
    int bad = 0;
    for (size_t i = 0; i < nvec; i += 4) {
        const __m256d t = _mm256_loadu_pd(&grid.time[i]);
        const __m256d df = _mm256_loadu_pd(&grid.delay_frac[i]);
        const __m256d k = _mm256_loadu_pd(&grid.count[i]);
        const __m256d lgk1 = _mm256_loadu_pd(&grid.lgamma_k1[i]);

        const __m256d eta_p = _mm256_fmadd_pd(a2, df, _mm256_fmadd_pd(a1, t, a0));
        const __m256d eta_r = _mm256_fmadd_pd(b2, df, _mm256_fmadd_pd(b1, t, b0));

        bad |= _mm256_movemask_pd(_mm256_cmp_pd(abs_pd(eta_r), max_log_r, _CMP_GT_OQ));

        const __m256d r = exp_pd(eta_r);
        const __m256d log_p =
            _mm256_sub_pd(_mm256_setzero_pd(), softplus_pd(_mm256_sub_pd(_mm256_setzero_pd(), eta_p)));
        const __m256d log_1mp = _mm256_sub_pd(_mm256_setzero_pd(), softplus_pd(eta_p));

        __m256d term = _mm256_sub_pd(lgamma_diff_pd(k, r), lgk1);
        term = _mm256_fmadd_pd(r, log_p, term);
        term = _mm256_fmadd_pd(k, log_1mp, term);
        acc = _mm256_add_pd(acc, term);
    }
    if (bad) return -std::numeric_limits<double>::infinity();

    double total = hsum_pd(acc);

    // scalar tail, same formulas
    for (size_t i = nvec; i < n; ++i) {
        const double eta_p = c.a0 + c.a1 * grid.time[i] + c.a2 * grid.delay_frac[i];
        const double eta_r = c.b0 + c.b1 * grid.time[i] + c.b2 * grid.delay_frac[i];
        if (std::fabs(eta_r) > kMaxLogR) return -std::numeric_limits<double>::infinity();
        const double r = std::exp(eta_r);
        const double k = grid.count[i];
        total += lgamma_diff(k, r) - grid.lgamma_k1[i] - r * softplus(-eta_p) -
                 k * softplus(eta_p);
    }
    return total;
}

// Element-wise hooks so the unit tests can exercise the vector math without
// compiling intrinsics themselves.
void avx2_exp4(const double in[4], double out[4]) {
    _mm256_storeu_pd(out, exp_pd(_mm256_loadu_pd(in)));
}
void avx2_log4(const double in[4], double out[4]) {
    _mm256_storeu_pd(out, log_pd(_mm256_loadu_pd(in)));
}
void avx2_log1p4(const double in[4], double out[4]) {
    _mm256_storeu_pd(out, log1p_pd(_mm256_loadu_pd(in)));
}
void avx2_lgamma4(const double in[4], double out[4]) {
    _mm256_storeu_pd(out, lgamma_pd(_mm256_loadu_pd(in)));
}

} // namespace ibnr::kernels
