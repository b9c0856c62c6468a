#pragma once

/// Soft-interference-cancellation MMSE detection: per-user residual
/// covariance weighting, regularized filter solve and extrinsic demapping.

#include <array>
#include <vector>

#include "rislink/mat.hpp"
#include "rislink/modem.hpp"

namespace rislink {

/// Per-user soft symbol priors for one time instant.
struct PriorBank {
    std::vector<SoftSymbol> symbols;  // length K
};

struct DetectionResult {
    std::vector<CVec> filters;                 // per user, length M
    CVec estimates;                            // filter outputs, length K
    std::vector<double> mu;                    // effective gains, in [0,1]
    std::vector<std::array<double, 2>> llr;    // extrinsic LLRs per user
    int negative_mu_clamps = 0;
    int demap_flags = 0;
};

/// Residual-interference weights: diag entries var_j / sigma_x2 for j != k
/// and exactly 1 at position k (0-based).
std::vector<double> delta_matrix(const PriorBank& priors, int k, double sigma_x2);

/// w_k = (sigma_n2/sigma_x2 I + Hbar diag(delta) Hbar^H)^{-1} hbar_k
CVec mmse_sic_filter(const CMat& h_bar, const std::vector<double>& delta,
                     double sigma_n2, double sigma_x2, int k);

/// Parallel soft cancellation: y_k = y - sum_{j != k} hbar_j * mean_j, then
/// the per-user MMSE filter and Gaussian-model extrinsic demap. Priors are
/// not re-added; the LLRs are extrinsic only.
DetectionResult sic_detect(const CVec& y, const CMat& h_bar, const PriorBank& priors,
                           double sigma_n2, double sigma_x2);

} // namespace rislink
