#include "irlkit/kernels.hpp"
#include "irlkit/random.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace irl;
namespace k = irl::kernels;

namespace {
std::vector<double> draw(Rng& rng, std::size_t n, double lo, double hi) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(lo, hi);
    return x;
}
} // namespace

TEST_CASE("scalar backend is always available and listed first") {
    const auto backends = k::available_backends();
    REQUIRE_FALSE(backends.empty());
    CHECK(backends.front() == k::Backend::Scalar);
    CHECK(k::table_for(k::Backend::Scalar) == &k::scalar_table());
    CHECK(k::to_string(k::Backend::Avx2) == "avx2");
}

TEST_CASE("every backend matches the scalar reference") {
    const k::KernelTable& ref = k::scalar_table();
    Rng rng(77);
    for (const k::Backend b : k::available_backends()) {
        const k::KernelTable* t = k::table_for(b);
        REQUIRE(t != nullptr);
        CAPTURE(k::to_string(b));
        // Lengths around the vector width, including remainders.
        for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 101u}) {
            CAPTURE(n);
            const auto x = draw(rng, n, -5, 5);
            const auto y = draw(rng, n, -5, 5);
            auto p = draw(rng, n, 0, 1);
            const auto v = draw(rng, n, -10, 10);

            const double d_ref = ref.dot(x.data(), y.data(), n);
            CHECK(t->dot(x.data(), y.data(), n) == doctest::Approx(d_ref).epsilon(1e-12).scale(50));

            const double b_ref = ref.backup(p.data(), x.data(), v.data(), 0.9, n);
            CHECK(t->backup(p.data(), x.data(), v.data(), 0.9, n) ==
                  doctest::Approx(b_ref).epsilon(1e-12).scale(50));

            CHECK(t->max(x.data(), n) == ref.max(x.data(), n));

            const double shift = ref.max(x.data(), n);
            std::vector<double> o_ref(n), o(n);
            const double s_ref = ref.exp_shifted(x.data(), o_ref.data(), shift, 2.0, n);
            const double s = t->exp_shifted(x.data(), o.data(), shift, 2.0, n);
            CHECK(s == doctest::Approx(s_ref).epsilon(1e-13));
            for (std::size_t i = 0; i < n; ++i)
                CHECK(o[i] == doctest::Approx(o_ref[i]).epsilon(1e-13).scale(1e-300));
        }
    }
}

TEST_CASE("exp_shifted handles very negative arguments") {
    for (const k::Backend b : k::available_backends()) {
        const k::KernelTable* t = k::table_for(b);
        const std::vector<double> x{0.0, -800.0, -1e6, -30.0, -1.0};
        std::vector<double> o(x.size());
        const double s = t->exp_shifted(x.data(), o.data(), 0.0, 1.0, x.size());
        CHECK(o[0] == 1.0);
        CHECK(o[1] <= 1e-300);
        CHECK(o[2] == 0.0);
        CHECK(o[3] == doctest::Approx(std::exp(-30.0)).epsilon(1e-13));
        CHECK(std::isfinite(s));
    }
}

TEST_CASE("selection can be overridden") {
    const k::Backend before = k::active().backend;
    CHECK(k::select(k::Backend::Scalar));
    CHECK(k::active().backend == k::Backend::Scalar);
    CHECK(k::select(before));
}

TEST_CASE("log_sum_exp and softmax are stable") {
    const std::vector<double> x{1000.0, 1000.0};
    CHECK(k::log_sum_exp(x, 1.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(k::log_sum_exp(x, 1e-6) == doctest::Approx(1000.0 + 1e-6 * std::log(2.0)).epsilon(1e-14));
    std::vector<double> out(2);
    k::softmax(std::vector<double>{0.0, 1.0}, 1.0, out);
    CHECK(out[1] == doctest::Approx(0.7310585786300049).epsilon(1e-15));
    CHECK(out[0] + out[1] == doctest::Approx(1.0));
    k::softmax(std::vector<double>{0.0, 1.0}, 1e-3, out);
    CHECK(out[1] == 1.0);
    CHECK(out[0] < 1e-300);
}
