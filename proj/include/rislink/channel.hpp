#pragma once

/// Geometry-driven random channel generation and received-signal synthesis
/// for the multi-RIS uplink: direct link H (M x K), per-surface AP-RIS links
/// G_j (M x N) and RIS-users links F_j (N x K), all block fading.

#include <array>
#include <vector>

#include "rislink/mat.hpp"
#include "rislink/rng.hpp"

namespace rislink {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

enum class LinkKind { ap_ris, ris_user, ap_user };

/// 3GPP-style path loss in dB; throws std::domain_error for d <= 0.
double path_loss_db(LinkKind kind, double distance_m);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SystemGeometry {
    Vec3 ap_position{0.0, 0.0, 0.0};
    std::vector<Vec3> ris_positions;
    Vec3 user_center{0.0, 0.0, 0.0};
    double user_radius = 0.0;
    int M = 1;  // AP antennas
    int K = 1;  // single-antenna users
    int L = 1;  // surfaces
    int N = 1;  // elements per surface

    void validate() const;
};

enum class Scenario { los, nlos };

/// Mean-square gains of every link for the drawn user positions; these are
/// the exact second moments of the generative model and feed the estimator's
/// covariance priors.
struct LinkGains {
    std::vector<double> direct;               // K
    std::vector<double> ap_ris;               // L
    std::vector<std::vector<double>> ris_user; // L x K
};

struct ChannelSet {
    CMat H;                 // M x K, all-zero in NLOS
    std::vector<CMat> G;    // L of M x N
    std::vector<CMat> F;    // L of N x K
    double sigma_n2 = 0.0;  // noise power, watts (>= 0; 0 = noiseless)
    double sigma_x2 = 1.0;  // symbol energy
    LinkGains gains;
    std::vector<Vec3> user_positions;

    int M() const { return static_cast<int>(H.rows()); }
    int K() const { return static_cast<int>(H.cols()); }
    int L() const { return static_cast<int>(G.size()); }
    int N() const { return L() ? static_cast<int>(G[0].cols()) : 0; }

    /// [G_1 ... G_L], M x (L*N)
    CMat stacked_g() const;
    /// [F_1; ...; F_L], (L*N) x K
    CMat stacked_f() const;
};

/// Draws one block-fading realization: user positions uniform in a horizontal
/// disc of user_radius around user_center, i.i.d. complex Gaussian entries
/// scaled by the square-root linear path gain of each link. NLOS zeroes the
/// direct matrix; direct_extra_loss_db weakens it further in LOS.
ChannelSet draw_channels(const SystemGeometry& geom, Scenario scenario,
                         double sigma_n2, double sigma_x2, Rng& rng,
                         double direct_extra_loss_db = 0.0);

struct CascadedMatrices {
    std::vector<CMat> Z;  // K of M x (L*N), Z_k = G_p diag(f_{p,k})
    CMat Z_all;           // M x (K*L*N), [Z_1 ... Z_K]
};

CascadedMatrices cascaded_matrices(const ChannelSet& ch);

/// H + G_p diag(phi) F_p for one reflection vector (length L*N).
CMat equivalent_channel(const ChannelSet& ch, const CVec& phi);

/// Receive signal for a block: y^(t) = Hbar(phi_t) x_t + n_t with
/// n ~ CN(0, sigma_n2 I). phi columns and symbol columns must align.
CMat synthesize_rx(const ChannelSet& ch, const CMat& phi_schedule,
                   const CMat& symbols, Rng& rng);

} // namespace rislink
