#include <cstdlib>
#include <string>

#include "ibnr/common.hpp"
#include "ibnr/kernels/loglik.hpp"

namespace ibnr::kernels {

bool avx2_available() {
#if defined(IBNR_BUILD_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

SimdMode env_mode() {
    const char* env = std::getenv("IBNR_SIMD");
    if (!env) return SimdMode::Auto;
    const std::string v(env);
    if (v == "scalar") return SimdMode::Scalar;
    if (v == "avx2") return SimdMode::Avx2;
    return SimdMode::Auto;
}

} // namespace

LoglikFn select_loglik_kernel(SimdMode mode) {
    if (mode == SimdMode::Auto) mode = env_mode();
#if defined(IBNR_BUILD_AVX2)
    if (mode == SimdMode::Avx2) {
        if (!avx2_available()) throw NumericalError("AVX2 kernel requested but CPU lacks AVX2");
        return &loglik_avx2;
    }
    if (mode == SimdMode::Auto && avx2_available()) return &loglik_avx2;
#else
    if (mode == SimdMode::Avx2) throw NumericalError("this build has no AVX2 kernel");
#endif
    return &loglik_scalar;
}

std::string active_kernel_name() {
    return select_loglik_kernel(SimdMode::Auto) == &loglik_scalar ? "scalar" : "avx2";
}

} // namespace ibnr::kernels
