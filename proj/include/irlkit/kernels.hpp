#pragma once

// Inner-loop arithmetic shared by all solvers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The variant is
// picked once at first use from the running CPU; tests compare each variant
// against the scalar reference.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace irl::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend backend);

/// Function table for one backend. All pointers are non-null.
struct KernelTable {
    Backend backend;
    /// sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// sum_i p[i] * (r[i] + gamma * v[i])
    double (*backup)(const double* p, const double* r, const double* v, double gamma,
                     std::size_t n);
    /// max_i x[i]; n >= 1
    double (*max)(const double* x, std::size_t n);
    /// out[i] = exp((x[i] - shift) * scale), returns sum_i out[i].
    /// Arguments are expected to satisfy (x[i] - shift) * scale <= 0.
    double (*exp_shifted)(const double* x, double* out, double shift, double scale,
                          std::size_t n);
};

const KernelTable& scalar_table();

/// Null when the backend is not compiled in or the CPU lacks it.
const KernelTable* table_for(Backend backend);

/// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();

/// Table selected for this process.
const KernelTable& active();

/// Overrides the process-wide selection; returns false if unavailable.
bool select(Backend backend);

// Span front-ends over the active table.

inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}

inline double backup(std::span<const double> p, std::span<const double> r,
                     std::span<const double> v, double gamma) {
    return active().backup(p.data(), r.data(), v.data(), gamma, p.size());
}

inline double max(std::span<const double> x) { return active().max(x.data(), x.size()); }

/// scale * log sum_i exp(x[i] / scale), stabilized by subtracting the maximum.
double log_sum_exp(std::span<const double> x, double scale);

/// out = softmax(x / scale) computed with max subtraction.
void softmax(std::span<const double> x, double scale, std::span<double> out);

namespace detail {
// Per-backend entry points. Defined in kernels_*.cpp.
const KernelTable* avx2_table();
const KernelTable* neon_table();
} // namespace detail

} // namespace irl::kernels
