#pragma once

/// Reflection-parameter optimization and the structured per-packet reflection
/// schedules: sign-flipped DFT pilots, DFT-swept parity columns and a single
/// optimized vector replicated over the data segment.

#include <vector>

#include "rislink/ldpc.hpp"
#include "rislink/mat.hpp"

namespace rislink {

enum class SegTag { pilot, data, parity };

struct ReflectionSchedule {
    CMat theta;               // (L*N) x T, unit-modulus entries
    std::vector<SegTag> tags; // per column
};

struct PilotBook {
    CMat X_p;  // K x N_p pilot symbols; second half repeats the first
};

/// Hadamard matrix of the given order (+/-1 entries). Sylvester doubling
/// composed with Paley type-I cores; throws if no construction is known.
std::vector<std::vector<int>> hadamard(int order);
bool hadamard_order_available(int order);

/// K x N_p pilot book: first N_p/2 columns are the leading K rows of a
/// Hadamard matrix scaled to symbol energy sigma_x2 (unit-phase rotated onto
/// the QPSK diagonal), second half repeats the first.
PilotBook build_pilot_symbols(int K, int n_pilot, double sigma_x2);

/// Parity-segment sweep: entry (r,c) = w^(r*c) with w = exp(-2*pi*i/N_ps);
/// rows wrap naturally when N_total exceeds the harmonic range.
CMat build_theta_ps(int n_total, int n_ps);

/// Pilot-segment schedule [T* -T*] where T* spans the first N_p/2 columns of
/// a DFT of order max(N_total, N_p/2). Throws for odd N_p.
CMat build_theta_p(int n_total, int n_p);
CMat build_theta_star(int n_total, int n_p);

/// Data segment: n_info copies of one reflection vector (rank 1).
CMat build_theta_o(const CVec& phi_o, int n_info);

/// Full packet schedule [pilot | data | parity] following the layout.
ReflectionSchedule build_schedule(int n_total, const PacketLayout& layout,
                                  const CVec& phi_o);

struct PhiResult {
    CVec phi;
    bool ridge_applied = false;
};

/// MMSE reflection design: phi = beta^{-1} Psi with
/// beta = sum_k (W Z_k)^H (W Z_k), Psi = sum_k (W Z_k)^H (e_k - W h_k).
/// W is the K x M bank of receive filters (rows w_k^H), h_k the direct
/// channel columns. A near-singular beta is ridge-regularized and flagged.
PhiResult optimize_phi(const CMat& W, const std::vector<CMat>& Z, const CMat& h_direct);

struct TruncateResult {
    CVec phi;
    int zero_substitutions = 0;
};

/// Element-wise projection onto the unit circle; zero entries map to 1+0j.
TruncateResult truncate_passive(const CVec& phi);

/// Kronecker measurement columns lambda_j = x_j (x) phi_j.
CMat build_lambda(const CMat& x_cols, const CMat& phi_cols);

} // namespace rislink
