#include "rislink/detector.hpp"

#include <stdexcept>

#include "rislink/kernels.hpp"

namespace rislink {

std::vector<double> delta_matrix(const PriorBank& priors, int k, double sigma_x2) {
    const int K = static_cast<int>(priors.symbols.size());
    if (k < 0 || k >= K) throw std::out_of_range("delta_matrix: user index out of range");
    if (!(sigma_x2 > 0.0)) throw std::invalid_argument("delta_matrix: sigma_x2 <= 0");
    std::vector<double> d(K);
    for (int j = 0; j < K; ++j) {
        d[j] = (j == k) ? 1.0 : priors.symbols[j].variance / sigma_x2;
    }
    return d;
}

CVec mmse_sic_filter(const CMat& h_bar, const std::vector<double>& delta,
                     double sigma_n2, double sigma_x2, int k) {
    const std::size_t M = h_bar.rows();
    const std::size_t K = h_bar.cols();
    if (delta.size() != K || k < 0 || static_cast<std::size_t>(k) >= K) {
        throw std::invalid_argument("mmse_sic_filter: dimension mismatch");
    }
    if (!(sigma_n2 / sigma_x2 > 0.0)) {
        throw std::invalid_argument("mmse_sic_filter: non-positive regularizer");
    }
    // sigma_n2/sigma_x2 I + Hbar diag(delta) Hbar^H
    CMat a(M, M);
    for (std::size_t j = 0; j < K; ++j) {
        if (delta[j] == 0.0) continue;
        const cd* hj = h_bar.col(j);
        for (std::size_t r = 0; r < M; ++r) {
            kernels::axpy(delta[j] * std::conj(hj[r]), hj + r, a.col(r) + r, M - r);
        }
    }
    for (std::size_t r = 0; r < M; ++r) {
        a(r, r) = cd{a(r, r).real() + sigma_n2 / sigma_x2, 0.0};
        for (std::size_t i = r + 1; i < M; ++i) a(r, i) = std::conj(a(i, r));
    }
    CMat rhs(M, 1);
    rhs.set_col(0, h_bar.get_col(k));
    return linalg::solve_hpd(std::move(a), std::move(rhs)).get_col(0);
}

DetectionResult sic_detect(const CVec& y, const CMat& h_bar, const PriorBank& priors,
                           double sigma_n2, double sigma_x2) {
    const std::size_t M = h_bar.rows();
    const std::size_t K = h_bar.cols();
    if (y.size() != M || priors.symbols.size() != K) {
        throw std::invalid_argument("sic_detect: dimension mismatch");
    }
    DetectionResult res;
    res.filters.reserve(K);
    res.estimates.resize(K);
    res.mu.resize(K);
    res.llr.resize(K);

    // full soft interference once, add each user's own mean back per user
    CVec y_clean = y;
    for (std::size_t j = 0; j < K; ++j) {
        kernels::axpy(-priors.symbols[j].mean, h_bar.col(j), y_clean.data(), M);
    }
    CVec yk(M);
    for (std::size_t k = 0; k < K; ++k) {
        const auto delta = delta_matrix(priors, static_cast<int>(k), sigma_x2);
        CVec w = mmse_sic_filter(h_bar, delta, sigma_n2, sigma_x2, static_cast<int>(k));
        yk = y_clean;
        kernels::axpy(priors.symbols[k].mean, h_bar.col(k), yk.data(), M);
        const cd z = kernels::dotc(w.data(), yk.data(), M);
        double mu = kernels::dotc(w.data(), h_bar.col(k), M).real();
        if (mu < 0.0) {
            mu = 0.0;
            ++res.negative_mu_clamps;
        }
        const DemapResult dm = extrinsic_demap(z, mu, sigma_x2);
        if (dm.flagged) ++res.demap_flags;
        res.estimates[k] = z;
        res.mu[k] = mu;
        res.llr[k] = dm.llr;
        res.filters.push_back(std::move(w));
    }
    return res;
}

} // namespace rislink
