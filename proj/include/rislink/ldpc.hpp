#pragma once

/// Regular LDPC code: progressive-edge-growth construction, systematic
/// encoding, flooding sum-product decoding and alist import/export.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rislink/common.hpp"

namespace rislink {

/// Index map of pilot / information / parity symbol positions in one coded
/// block. Pilots occupy the leading systematic symbol positions, information
/// fills the remaining systematic positions, parity the rest.
struct PacketLayout {
    int n_pilot_sym = 0;
    int n_info_sym = 0;
    int n_parity_sym = 0;
    std::vector<int> pilot_idx;
    std::vector<int> info_idx;
    std::vector<int> parity_idx;

    int total_symbols() const { return n_pilot_sym + n_info_sym + n_parity_sym; }
};

PacketLayout make_packet_layout(int n_bits, double rate, int n_pilot_sym, int bits_per_sym);

class LdpcCode {
public:
    /// Regular (column_weight) parity-check construction, girth-aware edge
    /// placement, deterministic under seed. The stored matrix is column
    /// permuted so its last n-k columns are invertible; encoding is
    /// systematic in the first k positions.
    static LdpcCode construct_regular(int n, double rate, int column_weight,
                                      std::uint64_t seed);

    int n() const { return n_; }
    int k() const { return n_ - m_; }
    int m() const { return m_; }
    double rate() const { return static_cast<double>(k()) / n_; }
    int column_weight() const { return column_weight_; }

    const std::vector<std::vector<int>>& check_neighbors() const { return check_nb_; }
    const std::vector<std::vector<int>>& var_neighbors() const { return var_nb_; }

    /// Systematic encode: codeword[0..k) == message, parity appended.
    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& message) const;

    bool syndrome_ok(const std::vector<std::uint8_t>& word) const;

    struct DecodeResult {
        std::vector<double> posterior;
        std::vector<double> extrinsic;
        std::vector<std::uint8_t> hard;
        bool converged = false;
        int iterations = 0;
    };

    /// Flooding sum-product decode. Input LLRs use ln P(b=0)/P(b=1) and are
    /// clamped to +/-kLlrClamp on entry; non-convergence is reported, not an
    /// error.
    DecodeResult bp_decode(const std::vector<double>& channel_llr, int max_iters) const;

    void write_alist(std::ostream& os) const;
    /// Rebuilds a code from alist text; throws if the trailing n-k columns do
    /// not form an invertible systematic transform.
    static LdpcCode read_alist(std::istream& is);

private:
    LdpcCode() = default;
    void build_edges();
    void build_encoder();

    int n_ = 0;
    int m_ = 0;
    int column_weight_ = 0;
    std::vector<std::vector<int>> check_nb_;  // per check: variable indices
    std::vector<std::vector<int>> var_nb_;    // per variable: check indices

    // flattened edge structure for decoding
    std::vector<int> edge_var_;               // edge -> variable
    std::vector<int> check_edge_start_;       // per check: first edge
    std::vector<std::vector<int>> var_edges_; // per variable: edge indices

    // encoder: parity = sum over set message bits of a per-bit parity mask
    std::size_t parity_words_ = 0;
    std::vector<std::uint64_t> encode_masks_; // k rows of parity_words_ words
};

} // namespace rislink
