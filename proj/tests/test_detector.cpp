#include <doctest.h>

#include <cmath>

#include "rislink/detector.hpp"
#include "rislink/kernels.hpp"
#include "rislink/rng.hpp"

using namespace rislink;

namespace {

CMat random_mat(Rng& rng, std::size_t r, std::size_t c) {
    CMat m(r, c);
    for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = rng.cgauss();
    return m;
}

// independent classical MMSE bank: rows of (reg I + H H^H)^{-1} H, computed
// with a naive Gauss-Jordan inverse rather than the library solvers
CMat classical_mmse_filters(const CMat& h, double reg) {
    const std::size_t m = h.rows();
    CMat a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            cd s = (i == j) ? cd{reg, 0.0} : cd{};
            for (std::size_t k = 0; k < h.cols(); ++k) s += h(i, k) * std::conj(h(j, k));
            a(i, j) = s;
        }
    }
    CMat inv = CMat::identity(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < m; ++i) {
            if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
        }
        for (std::size_t j = 0; j < m; ++j) {
            std::swap(a(k, j), a(p, j));
            std::swap(inv(k, j), inv(p, j));
        }
        const cd piv = a(k, k);
        for (std::size_t j = 0; j < m; ++j) {
            a(k, j) /= piv;
            inv(k, j) /= piv;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (i == k) continue;
            const cd f = a(i, k);
            for (std::size_t j = 0; j < m; ++j) {
                a(i, j) -= f * a(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    CMat w(m, h.cols());
    for (std::size_t c = 0; c < h.cols(); ++c) {
        for (std::size_t i = 0; i < m; ++i) {
            cd s{};
            for (std::size_t j = 0; j < m; ++j) s += inv(i, j) * h(j, c);
            w(i, c) = s;
        }
    }
    return w;
}

PriorBank uniform_priors(int K, double sigma_x2) {
    PriorBank b;
    b.symbols.assign(K, SoftSymbol{cd{}, sigma_x2});
    return b;
}

// analytic filter MSE under the prior model
double model_mse(const CVec& w, const CMat& h, const std::vector<double>& delta,
                 double sigma_n2, double sigma_x2, int k) {
    const std::size_t m = h.rows();
    double quad = sigma_n2 * kernels::sumsq(w.data(), m);
    for (std::size_t j = 0; j < h.cols(); ++j) {
        quad += sigma_x2 * delta[j] * std::norm(kernels::dotc(w.data(), h.col(j), m));
    }
    const double cross = kernels::dotc(w.data(), h.col(k), m).real();
    return sigma_x2 - 2.0 * sigma_x2 * cross + quad;
}

} // namespace

TEST_CASE("residual covariance weights") {
    PriorBank b;
    b.symbols = {SoftSymbol{cd{}, 1.0}, SoftSymbol{cd{}, 1.0}, SoftSymbol{cd{}, 1.0}};
    SUBCASE("uniform priors give the identity") {
        const auto d = delta_matrix(b, 1, 1.0);
        CHECK(d == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("perfect interferer priors zero everything but position k") {
        b.symbols[0].variance = 0.0;
        b.symbols[2].variance = 0.0;
        const auto d = delta_matrix(b, 1, 1.0);
        CHECK(d == std::vector<double>{0.0, 1.0, 0.0});
    }
    SUBCASE("two-user example") {
        PriorBank p;
        p.symbols = {SoftSymbol{cd{}, 1.0}, SoftSymbol{cd{}, 0.5}};
        const auto d = delta_matrix(p, 0, 1.0);
        CHECK(d[0] == 1.0);
        CHECK(d[1] == doctest::Approx(0.5));
    }
    SUBCASE("index out of range") {
        CHECK_THROWS_AS(delta_matrix(b, 3, 1.0), std::out_of_range);
        CHECK_THROWS_AS(delta_matrix(b, -1, 1.0), std::out_of_range);
    }
}

TEST_CASE("mmse filter solutions") {
    SUBCASE("scalar value") {
        CMat h(1, 1);
        h(0, 0) = cd{1, 0};
        const CVec w = mmse_sic_filter(h, {1.0}, 1.0, 1.0, 0);
        CHECK(std::abs(w[0] - cd{0.5, 0.0}) < 1e-14);
    }
    SUBCASE("uniform priors reduce to the classical filter") {
        Rng rng(3);
        const CMat h = random_mat(rng, 6, 3);
        const double reg = 0.37;
        const CMat w_ref = classical_mmse_filters(h, reg);
        for (int k = 0; k < 3; ++k) {
            const CVec w = mmse_sic_filter(h, {1.0, 1.0, 1.0}, reg, 1.0, k);
            for (int i = 0; i < 6; ++i) CHECK(std::abs(w[i] - w_ref(i, k)) < 1e-11);
        }
    }
    SUBCASE("perfect interferer priors leave the rank-one solve") {
        Rng rng(5);
        const CMat h = random_mat(rng, 4, 2);
        const CVec w = mmse_sic_filter(h, {1.0, 0.0}, 0.2, 1.0, 0);
        // reference: (reg I + h0 h0^H)^{-1} h0 via Sherman-Morrison
        const double reg = 0.2;
        const double n0 = kernels::sumsq(h.col(0), 4);
        for (int i = 0; i < 4; ++i) {
            const cd want = h(i, 0) / reg - h(i, 0) * n0 / (reg * (reg + n0));
            CHECK(std::abs(w[i] - want) < 1e-12);
        }
    }
}

TEST_CASE("soft cancellation detection") {
    SUBCASE("single user, effectively noiseless") {
        Rng rng(11);
        const CMat h = random_mat(rng, 4, 1);
        const Constellation c = Constellation::qpsk(1.0);
        const cd x = c.map(1, 0);
        CVec y(4);
        for (int i = 0; i < 4; ++i) y[i] = h(i, 0) * x;
        const auto det = sic_detect(y, h, uniform_priors(1, 1.0), 1e-6, 1.0);
        CHECK(det.mu[0] > 0.999999);
        const auto bits = hard_demap(det.estimates[0], c);
        CHECK(bits[0] == 1);
        CHECK(bits[1] == 0);
        CHECK(det.llr[0][0] < 0.0);
        CHECK(det.llr[0][1] > 0.0);
    }
    SUBCASE("perfect priors cancel all interference") {
        Rng rng(13);
        const int M = 8, K = 4;
        const CMat h = random_mat(rng, M, K);
        const Constellation c = Constellation::qpsk(1.0);
        std::vector<std::array<std::uint8_t, 2>> tx_bits(K);
        CVec x(K);
        for (int k = 0; k < K; ++k) {
            tx_bits[k] = {static_cast<std::uint8_t>(rng.next_u64() & 1),
                          static_cast<std::uint8_t>(rng.next_u64() & 1)};
            x[k] = c.map(tx_bits[k][0], tx_bits[k][1]);
        }
        const CVec y = linalg::matvec(h, x);
        PriorBank priors;
        priors.symbols.resize(K);
        for (int k = 0; k < K; ++k) priors.symbols[k] = SoftSymbol{x[k], 0.0};
        const auto det = sic_detect(y, h, priors, 1e-9, 1.0);
        for (int k = 0; k < K; ++k) {
            const auto bits = hard_demap(det.estimates[k], c);
            CHECK(bits[0] == tx_bits[k][0]);
            CHECK(bits[1] == tx_bits[k][1]);
            // extrinsic signs match the true bits
            CHECK((det.llr[k][0] < 0) == (tx_bits[k][0] == 1));
            CHECK((det.llr[k][1] < 0) == (tx_bits[k][1] == 1));
        }
    }
    SUBCASE("uniform priors match the classical detector") {
        Rng rng(17);
        const int M = 8, K = 4;
        for (int inst = 0; inst < 10; ++inst) {
            const CMat h = random_mat(rng, M, K);
            CVec y(M);
            for (auto& v : y) v = rng.cgauss();
            const double sn2 = 0.4, sx2 = 1.3;
            const auto det = sic_detect(y, h, uniform_priors(K, sx2), sn2, sx2);
            const CMat w_ref = classical_mmse_filters(h, sn2 / sx2);
            for (int k = 0; k < K; ++k) {
                cd z{};
                for (int i = 0; i < M; ++i) z += std::conj(w_ref(i, k)) * y[i];
                CHECK(std::abs(det.estimates[k] - z) < 1e-10);
            }
        }
    }
    SUBCASE("effective gain stays in the unit interval") {
        Rng rng(19);
        for (int inst = 0; inst < 50; ++inst) {
            const int M = 2 + static_cast<int>(rng.uniform() * 6);
            const int K = 1 + static_cast<int>(rng.uniform() * 4);
            const CMat h = random_mat(rng, M, K);
            PriorBank priors;
            priors.symbols.resize(K);
            for (int k = 0; k < K; ++k) {
                priors.symbols[k] = SoftSymbol{0.3 * rng.cgauss(), rng.uniform()};
            }
            CVec y(M);
            for (auto& v : y) v = rng.cgauss();
            const auto det = sic_detect(y, h, priors, 0.1 + rng.uniform(), 1.0);
            for (int k = 0; k < K; ++k) {
                CHECK(det.mu[k] >= 0.0);
                CHECK(det.mu[k] <= 1.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("filter minimizes the model mse") {
    Rng rng(23);
    const int M = 5, K = 3;
    const CMat h = random_mat(rng, M, K);
    PriorBank priors;
    priors.symbols.resize(K);
    for (int k = 0; k < K; ++k) priors.symbols[k] = SoftSymbol{0.2 * rng.cgauss(), 0.6};
    const double sn2 = 0.3, sx2 = 1.0;
    const int k = 1;
    const auto delta = delta_matrix(priors, k, sx2);
    const CVec w = mmse_sic_filter(h, delta, sn2, sx2, k);
    const double base = model_mse(w, h, delta, sn2, sx2, k);
    for (int p = 0; p < 100; ++p) {
        CVec wp = w;
        for (int i = 0; i < M; ++i) wp[i] += 1e-3 * rng.cgauss();
        CHECK(model_mse(wp, h, delta, sn2, sx2, k) >= base - 1e-9);
    }
}
