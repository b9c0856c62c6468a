#include <doctest.h>

#include <cmath>

#include "rislink/mat.hpp"
#include "rislink/rng.hpp"

using namespace rislink;

namespace {

CMat random_mat(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    CMat m(r, c);
    for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = scale * rng.cgauss();
    return m;
}

// independent naive reference product
CMat naive_mul(const CMat& a, const CMat& b) {
    CMat c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            cd s{};
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    }
    return c;
}

// independent dense solver: Gauss-Jordan with partial pivoting
CMat naive_solve(CMat a, CMat b) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        }
        for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
        for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
        const cd piv = a(k, k);
        for (std::size_t j = 0; j < n; ++j) a(k, j) /= piv;
        for (std::size_t j = 0; j < b.cols(); ++j) b(k, j) /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const cd f = a(i, k);
            if (f == cd{}) continue;
            for (std::size_t j = 0; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    return b;
}

double max_abs_diff(const CMat& a, const CMat& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

} // namespace

TEST_CASE("products match the naive reference") {
    Rng rng(3);
    const CMat a = random_mat(rng, 7, 5);
    const CMat b = random_mat(rng, 5, 6);
    CHECK(max_abs_diff(linalg::mul(a, b), naive_mul(a, b)) < 1e-12);

    const CMat c = random_mat(rng, 7, 4);
    CHECK(max_abs_diff(linalg::mul_ahb(a, c), naive_mul(linalg::conj_transpose(a), c)) < 1e-12);

    const CMat d = random_mat(rng, 9, 5);
    CHECK(max_abs_diff(linalg::mul_abh(a, d), naive_mul(a, linalg::conj_transpose(d))) < 1e-12);

    CHECK(max_abs_diff(linalg::gram_aah(a), naive_mul(a, linalg::conj_transpose(a))) < 1e-12);
    CHECK(max_abs_diff(linalg::gram_aha(a), naive_mul(linalg::conj_transpose(a), a)) < 1e-12);
}

TEST_CASE("hpd solve matches the naive solver") {
    Rng rng(11);
    const CMat a = random_mat(rng, 8, 8);
    CMat hpd = linalg::gram_aah(a);
    for (std::size_t i = 0; i < 8; ++i) hpd(i, i) += 0.5;
    const CMat b = random_mat(rng, 8, 3);
    const CMat x = linalg::solve_hpd(hpd, b);
    const CMat x_ref = naive_solve(hpd, b);
    CHECK(max_abs_diff(x, x_ref) < 1e-10);
    CHECK(max_abs_diff(linalg::mul(hpd, x), b) < 1e-11);
}

TEST_CASE("cholesky rejects an indefinite matrix") {
    CMat m(2, 2);
    m(0, 0) = cd{1.0, 0.0};
    m(1, 1) = cd{-1.0, 0.0};
    CMat b(2, 1);
    b(0, 0) = cd{1.0, 0.0};
    CHECK_THROWS(linalg::solve_hpd(m, b));
}

TEST_CASE("lu solve handles pivoting") {
    CMat a(3, 3);
    // zero leading pivot forces a row swap
    a(0, 0) = cd{0.0, 0.0};
    a(0, 1) = cd{2.0, 0.0};
    a(0, 2) = cd{1.0, 0.0};
    a(1, 0) = cd{1.0, 1.0};
    a(1, 1) = cd{0.5, 0.0};
    a(1, 2) = cd{0.0, -1.0};
    a(2, 0) = cd{3.0, 0.0};
    a(2, 1) = cd{0.0, 2.0};
    a(2, 2) = cd{1.0, 0.0};
    Rng rng(5);
    const CMat b = random_mat(rng, 3, 2);
    const CMat x = linalg::solve_lu(a, b);
    CHECK(max_abs_diff(linalg::mul(a, x), b) < 1e-12);

    const CMat x_ref = naive_solve(a, b);
    CHECK(max_abs_diff(x, x_ref) < 1e-12);
}

TEST_CASE("extreme eigenvalues of a known diagonal") {
    CMat d(4, 4);
    d(0, 0) = cd{4.0, 0.0};
    d(1, 1) = cd{2.5, 0.0};
    d(2, 2) = cd{1.0, 0.0};
    d(3, 3) = cd{0.25, 0.0};
    // rotate with a unitary-ish random basis to avoid iteration accidents
    Rng rng(9);
    CMat q = random_mat(rng, 4, 4);
    CMat g = linalg::gram_aah(q);
    for (int i = 0; i < 4; ++i) g(i, i) += 3.0;
    // g is HPD; use d directly for the exact check
    const auto [emax, emin] = linalg::extreme_eigs_hpsd(d, 60);
    CHECK(emax == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(emin == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("matvec agrees with mul") {
    Rng rng(13);
    const CMat a = random_mat(rng, 6, 4);
    CMat x(4, 1);
    for (int i = 0; i < 4; ++i) x(i, 0) = rng.cgauss();
    const CVec y = linalg::matvec(a, x.get_col(0));
    const CMat y_ref = linalg::mul(a, x);
    for (int i = 0; i < 6; ++i) CHECK(std::abs(y[i] - y_ref(i, 0)) < 1e-13);
    const CVec z = linalg::matvec_ah(a, CVec(6, cd{1.0, 0.5}));
    CMat ones(6, 1);
    for (int i = 0; i < 6; ++i) ones(i, 0) = cd{1.0, 0.5};
    const CMat z_ref = linalg::mul(linalg::conj_transpose(a), ones);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(z[i] - z_ref(i, 0)) < 1e-13);
}
