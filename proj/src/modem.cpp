#include "rislink/modem.hpp"

#include <cmath>
#include <stdexcept>

namespace rislink {

Constellation Constellation::qpsk(double sigma_x2) {
    if (!(sigma_x2 > 0.0)) throw std::invalid_argument("qpsk: sigma_x2 must be > 0");
    Constellation c;
    c.sigma_x2 = sigma_x2;
    c.amp = std::sqrt(sigma_x2 * 0.5);
    return c;
}

std::vector<cd> map_bits(const std::vector<std::uint8_t>& bits, const Constellation& c) {
    if (bits.size() % 2 != 0) throw std::invalid_argument("map_bits: odd bit count");
    std::vector<cd> out(bits.size() / 2);
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = c.map(bits[2 * t], bits[2 * t + 1]);
    }
    return out;
}

std::array<std::uint8_t, 2> hard_demap(cd z, const Constellation&) {
    return {static_cast<std::uint8_t>(z.real() < 0.0),
            static_cast<std::uint8_t>(z.imag() < 0.0)};
}

SoftSymbol soft_symbol(double llr0, double llr1, const Constellation& c) {
    // Per-axis mean amp*tanh(L/2); energy is constant so the variance is
    // sigma_x2 - |mean|^2. Matches the 4-point enumeration exactly.
    const double m0 = std::tanh(0.5 * clamp_llr(llr0));
    const double m1 = std::tanh(0.5 * clamp_llr(llr1));
    SoftSymbol s;
    s.mean = cd{c.amp * m0, c.amp * m1};
    s.variance = c.sigma_x2 - std::norm(s.mean);
    if (s.variance < 0.0) s.variance = 0.0;
    return s;
}

DemapResult extrinsic_demap(cd z, double mu, double sigma_x2) {
    DemapResult r;
    if (!(mu > 0.0)) {
        r.flagged = true;
        return r;  // no usable gain: zero LLRs
    }
    if (mu >= 1.0) {
        mu = 1.0 - 1e-6;
        r.flagged = true;
    }
    const double scale = 2.0 * std::sqrt(2.0) / (std::sqrt(sigma_x2) * (1.0 - mu));
    r.llr[0] = clamp_llr(scale * z.real());
    r.llr[1] = clamp_llr(scale * z.imag());
    return r;
}

} // namespace rislink
