// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma; only reached after the
// runtime dispatcher has confirmed CPU support. One __m256d holds two complex
// doubles in interleaved [re, im] layout.

#include "rislink/kernels.hpp"

#ifdef RISLINK_HAVE_AVX2_BUILD

#include <immintrin.h>

namespace rislink::kernels::detail {

namespace {

// [r0, i0, r1, i1] -> accumulator += a*b for two complex lanes.
inline __m256d cmul_acc(__m256d acc, __m256d va, __m256d vb) {
    const __m256d br = _mm256_movedup_pd(vb);           // [br0 br0 br1 br1]
    const __m256d bi = _mm256_permute_pd(vb, 0xF);      // [bi0 bi0 bi1 bi1]
    const __m256d va_sw = _mm256_permute_pd(va, 0x5);   // [ai0 ar0 ai1 ar1]
    const __m256d t = _mm256_mul_pd(va_sw, bi);
    return _mm256_add_pd(acc, _mm256_fmaddsub_pd(va, br, t));
}

inline cd reduce_complex(__m256d acc) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    return {lanes[0] + lanes[2], lanes[1] + lanes[3]};
}

const __m256d kConjMask = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);

} // namespace

cd dotu_avx2(const cd* a, const cd* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = cmul_acc(acc, _mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i));
    }
    cd s = reduce_complex(acc);
    if (i < n) s += dotu_scalar(a + i, b + i, n - i);
    return s;
}

cd dotc_avx2(const cd* a, const cd* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_xor_pd(_mm256_loadu_pd(pa + 2 * i), kConjMask);
        acc = cmul_acc(acc, va, _mm256_loadu_pd(pb + 2 * i));
    }
    cd s = reduce_complex(acc);
    if (i < n) s += dotc_scalar(a + i, b + i, n - i);
    return s;
}

void axpy_avx2(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    double* py = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real());
    const __m256d ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d vx = _mm256_loadu_pd(px + 2 * i);
        const __m256d vx_sw = _mm256_permute_pd(vx, 0x5);
        const __m256d prod = _mm256_fmaddsub_pd(vx, ar, _mm256_mul_pd(vx_sw, ai));
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
    }
    if (i < n) axpy_scalar(alpha, x + i, y + i, n - i);
}

double sumsq_avx2(const cd* a, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d v = _mm256_loadu_pd(pa + 2 * i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    if (i < n) s += sumsq_scalar(a + i, n - i);
    return s;
}

} // namespace rislink::kernels::detail

#endif // RISLINK_HAVE_AVX2_BUILD
