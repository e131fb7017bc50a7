// NEON variants for aarch64, where Advanced SIMD is part of the base ISA.

#include "irlkit/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

namespace irl::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

double backup_neon(const double* p, const double* r, const double* v, double gamma,
                   std::size_t n) {
    const float64x2_t g = vdupq_n_f64(gamma);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t target = vfmaq_f64(vld1q_f64(r + i), g, vld1q_f64(v + i));
        acc = vfmaq_f64(acc, vld1q_f64(p + i), target);
    }
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += p[i] * (r[i] + gamma * v[i]);
    return total;
}

double max_neon(const double* x, std::size_t n) {
    std::size_t i = 0;
    double m = x[0];
    if (n >= 2) {
        float64x2_t acc = vld1q_f64(x);
        for (i = 2; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vld1q_f64(x + i));
        m = vmaxvq_f64(acc);
    }
    for (; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

// Exponentials stay scalar here; only the accumulation is vectorized.
double exp_shifted_neon(const double* x, double* out, double shift, double scale,
                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp((x[i] - shift) * scale);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(out + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) total += out[i];
    return total;
}

constexpr KernelTable neon_kernels{Backend::Neon, dot_neon, backup_neon, max_neon,
                                   exp_shifted_neon};

} // namespace

const KernelTable* detail::neon_table() { return &neon_kernels; }

} // namespace irl::kernels

#else

namespace irl::kernels {
const KernelTable* detail::neon_table() { return nullptr; }
} // namespace irl::kernels

#endif
