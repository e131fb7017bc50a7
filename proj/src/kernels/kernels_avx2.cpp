// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma on
// x86-64 and is only entered after a runtime CPU check.

#include "irlkit/kernels.hpp"

#if defined(IRLKIT_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace irl::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double backup_avx2(const double* p, const double* r, const double* v, double gamma,
                   std::size_t n) {
    const __m256d g = _mm256_set1_pd(gamma);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d target = _mm256_fmadd_pd(g, _mm256_loadu_pd(v + i), _mm256_loadu_pd(r + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(p + i), target, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += p[i] * (r[i] + gamma * v[i]);
    return total;
}

double max_avx2(const double* x, std::size_t n) {
    std::size_t i = 0;
    double m = x[0];
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(x);
        for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
        m = hmax(acc);
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

// exp(x) for x in (-inf, 709]. Cody-Waite reduction x = k ln2 + r, |r| <= ln2/2,
// then a degree-13 Taylor polynomial (truncation below 1e-17 relative).
// Inputs below -708.39 flush to zero.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d lower = _mm256_set1_pd(-708.39);
    const __m256d upper = _mm256_set1_pd(709.0);

    __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lower), upper);

    __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    // 1/13!, 1/12!, ..., 1/1!, 1/0!
    static constexpr double coeff[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
        1.0,                1.0};
    __m256d poly = _mm256_set1_pd(coeff[0]);
    for (std::size_t j = 1; j < sizeof(coeff) / sizeof(coeff[0]); ++j)
        poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(coeff[j]));

    __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i k64 = _mm256_cvtepi32_epi64(k32);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    __m256d result = _mm256_mul_pd(poly, _mm256_castsi256_pd(bits));
    return _mm256_andnot_pd(underflow, result);
}

double exp_shifted_avx2(const double* x, double* out, double shift, double scale,
                        std::size_t n) {
    const __m256d sh = _mm256_set1_pd(shift);
    const __m256d sc = _mm256_set1_pd(scale);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d arg = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh), sc);
        __m256d e = exp_pd(arg);
        _mm256_storeu_pd(out + i, e);
        acc = _mm256_add_pd(acc, e);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        out[i] = std::exp((x[i] - shift) * scale);
        total += out[i];
    }
    return total;
}

constexpr KernelTable avx2_kernels{Backend::Avx2, dot_avx2, backup_avx2, max_avx2,
                                   exp_shifted_avx2};

} // namespace

const KernelTable* detail::avx2_table() {
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_kernels;
    return nullptr;
}

} // namespace irl::kernels

#else

namespace irl::kernels {
const KernelTable* detail::avx2_table() { return nullptr; }
} // namespace irl::kernels

#endif
