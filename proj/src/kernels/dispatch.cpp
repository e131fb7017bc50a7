#include "irlkit/kernels.hpp"

#include <atomic>
#include <cmath>

namespace irl::kernels {
namespace {

const KernelTable* detect() {
    if (const auto* t = detail::avx2_table()) return t;
    if (const auto* t = detail::neon_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& selected() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

} // namespace

std::string_view to_string(Backend backend) {
    switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable* table_for(Backend backend) {
    switch (backend) {
    case Backend::Scalar: return &scalar_table();
    case Backend::Avx2: return detail::avx2_table();
    case Backend::Neon: return detail::neon_table();
    }
    return nullptr;
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::Scalar};
    for (Backend b : {Backend::Avx2, Backend::Neon})
        if (table_for(b) != nullptr) out.push_back(b);
    return out;
}

const KernelTable& active() { return *selected().load(std::memory_order_relaxed); }

bool select(Backend backend) {
    const KernelTable* t = table_for(backend);
    if (t == nullptr) return false;
    selected().store(t, std::memory_order_relaxed);
    return true;
}

double log_sum_exp(std::span<const double> x, double scale) {
    const KernelTable& k = active();
    const double m = k.max(x.data(), x.size());
    std::vector<double> scratch(x.size());
    const double total = k.exp_shifted(x.data(), scratch.data(), m, 1.0 / scale, x.size());
    return m + scale * std::log(total);
}

void softmax(std::span<const double> x, double scale, std::span<double> out) {
    const KernelTable& k = active();
    const double m = k.max(x.data(), x.size());
    const double total = k.exp_shifted(x.data(), out.data(), m, 1.0 / scale, x.size());
    for (double& v : out) v /= total;
}

} // namespace irl::kernels
