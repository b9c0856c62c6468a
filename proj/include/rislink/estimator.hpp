#pragma once

/// Direct and cascaded LMMSE channel estimation plus the iterative
/// detection-decoding-reestimation loop that refines the cascaded estimate
/// from the whole coded packet.

#include <cstdint>
#include <vector>

#include "rislink/channel.hpp"
#include "rislink/detector.hpp"
#include "rislink/ldpc.hpp"
#include "rislink/mat.hpp"
#include "rislink/modem.hpp"
#include "rislink/ris.hpp"

namespace rislink {

/// Equal-size pilot partitions: P1 = {start .. start+half-1},
/// P2 = {start+half .. start+2*half-1}.
struct PartitionPair {
    int start = 0;
    int half = 0;

    static PartitionPair over(int start, int n_pilot);
    int first(int j) const { return start + j; }
    int second(int j) const { return start + half + j; }
};

/// Second-order model for one LMMSE solve. r_diag is the (real, PSD) channel
/// covariance diagonal in true channel units; noise_term is the observation
/// noise variance divided by sigma_x2, matching unit-energy-normalized
/// pilots.
struct LmmseModel {
    std::vector<double> r_diag;
    double noise_term = 0.0;
};

struct PartitionCombined {
    CMat sum;   // (y1 + y2)/2 per pair: direct link plus CN(0, sigma_n2/2)
    CMat diff;  // (y1 - y2)/2 per pair: reflected link plus CN(0, sigma_n2/2)
};

/// Validates the repeat/sign-flip pilot protocol and combines the two
/// partitions. Throws std::invalid_argument on protocol violations.
PartitionCombined combine_partitions(const CMat& y_pilot, const CMat& x_pilot,
                                     const CMat& phi_pilot);

/// Y (P^H R P + noise_term I)^{-1} P^H R, evaluated through whichever of the
/// T x T form or the dim x dim push-through form is smaller. P has channel
/// dimension rows and one column per observation.
CMat lmmse_estimate(const CMat& y, const CMat& p, const LmmseModel& model);

namespace detail {
CMat lmmse_direct_form(const CMat& y, const CMat& p, const LmmseModel& model);
CMat lmmse_dual_form(const CMat& y, const CMat& p, const LmmseModel& model);
}

/// Direct-link estimate from the partition sums (pilots normalized to unit
/// energy internally; model.noise_term should be sigma_n2/(2 sigma_x2)).
CMat estimate_direct(const CMat& sum_half, const PilotBook& book, double sigma_x2,
                     const LmmseModel& model);

/// Cascaded estimate from reflected observations and measurement columns
/// lambda = x (x) phi. Same normalization contract as estimate_direct.
CMat estimate_cascaded(const CMat& y_obs, const CMat& lambda, double sigma_x2,
                       const LmmseModel& model);

/// ||estimate - truth||_F^2 / ||truth||_F^2; throws on zero-norm truth.
double nmse(const CMat& estimate, const CMat& truth);

struct ReceiverContext {
    const LdpcCode* code = nullptr;
    PacketLayout layout;
    Constellation constellation;
    const PilotBook* book = nullptr;
    const ReflectionSchedule* schedule = nullptr;
    double sigma_n2 = 0.0;
    double sigma_x2 = 1.0;
    LmmseModel direct_model;     // K x K prior, noise term sigma_n2/(2 sigma_x2)
    LmmseModel cascaded_model;   // KLN prior, noise term sigma_n2/(2 sigma_x2)
    double refine_noise_term = 0.0;  // sigma_n2/sigma_x2 (unpaired observations)
    int idd_iterations = 2;
    int bp_max_iters = 50;
    int max_refinements = 1;
    double tol = 1e-3;
    bool include_data_columns = true;
    // a refinement built from re-encoded bits of a failed decode degrades the
    // estimate below the decoding threshold, so it is skipped by default
    bool exclude_unconverged = true;
    const CMat* genie_symbols = nullptr;  // K x T truth; skips the IDD stages
    const CMat* truth_z_all = nullptr;    // enables the oracle NMSE trace
};

struct IddResult {
    std::vector<std::vector<std::uint8_t>> codewords;  // per user, re-encoded
    std::vector<bool> converged;                       // per user
    CMat symbols;                                      // K x T remodulated
};

/// One detection/decoding stage with the given channel estimates: SIC-MMSE
/// detection on every non-pilot instant, per-user belief-propagation
/// decoding, idd_iterations extrinsic exchanges, then re-encode/remodulate.
IddResult detect_and_decode(const CMat& rx, const CMat& h_hat, const CMat& z_all_hat,
                            const ReceiverContext& ctx);

struct EstimateSet {
    CMat H_hat;
    CMat Z_all_hat;
    double nmse_coarse = -1.0;         // oracle NMSE of the two-step estimate
    std::vector<double> nmse_trace;    // oracle NMSE after each refinement
    std::vector<double> change_trace;  // surrogate relative change per refinement
    int iterations_used = 0;
};

struct ReceiverResult {
    EstimateSet est;
    std::vector<std::vector<std::uint8_t>> hard_bits;  // per user, n bits
    std::vector<bool> converged;
    double lambda_cond = 0.0;  // pilot+parity measurement conditioning
    bool refinement_skipped = false;
};

/// Two-step initial estimation from the pilot partitions, then
/// max_refinements rounds of IDD + whole-packet re-estimation of the
/// cascaded channel (stopping early when the relative change drops below
/// tol), and a final IDD pass with the refined estimates for the output bits.
ReceiverResult iterative_refine(const CMat& rx, const ReceiverContext& ctx);

} // namespace rislink
