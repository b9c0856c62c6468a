#include <doctest.h>

#include <cmath>

#include "rislink/kernels.hpp"
#include "rislink/mat.hpp"
#include "rislink/rng.hpp"

using namespace rislink;

namespace {

CVec random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    CVec v(n);
    for (auto& x : v) x = scale * rng.cgauss();
    return v;
}

double rel_err(cd a, cd b) {
    const double d = std::abs(a - b);
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0 ? d / s : d;
}

} // namespace

TEST_CASE("scalar kernels match a textbook loop") {
    Rng rng(7);
    const auto a = random_vec(rng, 17);
    const auto b = random_vec(rng, 17);
    cd du{}, dc{};
    for (std::size_t i = 0; i < a.size(); ++i) {
        du += a[i] * b[i];
        dc += std::conj(a[i]) * b[i];
    }
    CHECK(rel_err(kernels::detail::dotu_scalar(a.data(), b.data(), a.size()), du) < 1e-14);
    CHECK(rel_err(kernels::detail::dotc_scalar(a.data(), b.data(), a.size()), dc) < 1e-14);
    double sq = 0;
    for (auto& x : a) sq += std::norm(x);
    CHECK(kernels::detail::sumsq_scalar(a.data(), a.size()) == doctest::Approx(sq).epsilon(1e-13));
}

TEST_CASE("dispatched backends are equivalent") {
    if (kernels::active_backend() != kernels::Backend::avx2) {
        MESSAGE("avx2 unavailable; dispatch equivalence skipped");
        return;
    }
    Rng rng(42);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{8},
                          std::size_t{15}, std::size_t{64}, std::size_t{129}}) {
        const auto a = random_vec(rng, n, 2.0);
        const auto b = random_vec(rng, n, 0.5);
        const cd alpha = rng.cgauss();

        kernels::force_backend(kernels::Backend::scalar);
        const cd du_s = kernels::dotu(a.data(), b.data(), n);
        const cd dc_s = kernels::dotc(a.data(), b.data(), n);
        const double sq_s = kernels::sumsq(a.data(), n);
        CVec y_s = b;
        kernels::axpy(alpha, a.data(), y_s.data(), n);

        kernels::force_backend(kernels::Backend::avx2);
        const cd du_v = kernels::dotu(a.data(), b.data(), n);
        const cd dc_v = kernels::dotc(a.data(), b.data(), n);
        const double sq_v = kernels::sumsq(a.data(), n);
        CVec y_v = b;
        kernels::axpy(alpha, a.data(), y_v.data(), n);

        kernels::reset_backend();

        CHECK(rel_err(du_s, du_v) < 1e-12);
        CHECK(rel_err(dc_s, dc_v) < 1e-12);
        CHECK(sq_s == doctest::Approx(sq_v).epsilon(1e-12));
        for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(y_s[i], y_v[i]) < 1e-12);
    }
}

TEST_CASE("forcing an unavailable backend throws") {
    if (kernels::active_backend() == kernels::Backend::avx2) {
        // nothing to check on machines that do have it
        kernels::force_backend(kernels::Backend::scalar);
        CHECK(kernels::active_backend() == kernels::Backend::scalar);
        kernels::reset_backend();
    } else {
        CHECK_THROWS(kernels::force_backend(kernels::Backend::avx2));
    }
}
