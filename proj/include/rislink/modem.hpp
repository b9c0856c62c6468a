#pragma once

/// Gray-mapped QPSK, prior-driven soft symbol statistics and the
/// Gaussian-model extrinsic demapper used at the detector output.

#include <array>
#include <cstdint>
#include <vector>

#include "rislink/common.hpp"

namespace rislink {

// Bits per QPSK symbol.
inline constexpr int kBitsPerSymbol = 2;

/// Gray anchor: bit pair (0,0) -> (+1+j)/sqrt(2) * sigma_x. First bit drives
/// the real axis, second the imaginary axis; neighbors differ in one bit.
struct Constellation {
    double sigma_x2 = 1.0;  // symbol energy E[|x|^2]
    double amp = 0.7071067811865475244;  // per-axis amplitude sigma_x/sqrt(2)

    static Constellation qpsk(double sigma_x2);

    cd map(std::uint8_t b0, std::uint8_t b1) const {
        return cd{b0 ? -amp : amp, b1 ? -amp : amp};
    }

    std::array<cd, 4> points() const {
        return {map(0, 0), map(0, 1), map(1, 0), map(1, 1)};
    }
};

struct SoftSymbol {
    cd mean{0.0, 0.0};
    double variance = 0.0;
};

/// Maps an even-length bit stream to QPSK symbols (two bits per symbol, in
/// stream order). Throws std::invalid_argument on odd length.
std::vector<cd> map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c);

/// Minimum-distance hard decision back to a bit pair.
std::array<std::uint8_t, 2> hard_demap(cd z, const Constellation& c);

/// Soft symbol statistics from per-bit prior LLRs, convention
/// L = ln P(b=0)/P(b=1) (bit 0 <-> +1 axis sign).
SoftSymbol soft_symbol(double llr0, double llr1, const Constellation& c);

struct DemapResult {
    std::array<double, 2> llr{0.0, 0.0};
    bool flagged = false;  // effective gain left (0,1) and was clamped/zeroed
};

/// Extrinsic LLRs for the unbiased-gain Gaussian model z = mu*x + eta with
/// eta ~ CN(0, mu(1-mu)sigma_x^2). Outputs are clamped to +/-kLlrClamp.
DemapResult extrinsic_demap(cd z, double mu, double sigma_x2);

} // namespace rislink
