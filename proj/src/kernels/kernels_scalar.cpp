#include "irlkit/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace irl::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double backup_scalar(const double* p, const double* r, const double* v, double gamma,
                     std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += p[i] * (r[i] + gamma * v[i]);
    return acc;
}

double max_scalar(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double exp_shifted_scalar(const double* x, double* out, double shift, double scale,
                          std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::exp((x[i] - shift) * scale);
        acc += out[i];
    }
    return acc;
}

constexpr KernelTable scalar_kernels{Backend::Scalar, dot_scalar, backup_scalar, max_scalar,
                                     exp_shifted_scalar};

} // namespace

const KernelTable& scalar_table() { return scalar_kernels; }

} // namespace irl::kernels
