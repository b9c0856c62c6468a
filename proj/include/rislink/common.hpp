#pragma once

#include <complex>

namespace rislink {

using cd = std::complex<double>;

// Shared LLR saturation limit; keeps tanh-domain check updates and
// soft-symbol products away from overflow while staying effectively certain.
inline constexpr double kLlrClamp = 30.0;

inline double clamp_llr(double v) {
    if (v > kLlrClamp) return kLlrClamp;
    if (v < -kLlrClamp) return -kLlrClamp;
    return v;
}

} // namespace rislink
