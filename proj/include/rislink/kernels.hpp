#pragma once

/// Runtime-dispatched complex arithmetic kernels.
///
/// Every kernel has a scalar reference implementation and, on x86-64 with
/// AVX2+FMA, a vectorized variant selected once at startup. The two paths are
/// equivalence-tested against each other; callers never pick a backend
/// directly. Set RISLINK_FORCE_SCALAR=1 in the environment (or call
/// force_backend) to pin the scalar path.

#include <cstddef>

#include "rislink/common.hpp"

namespace rislink::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

// Pins the backend; throws std::runtime_error if it is unavailable here.
void force_backend(Backend b);
// Re-runs CPU detection (honoring RISLINK_FORCE_SCALAR).
void reset_backend();

// sum_i a[i] * b[i]
cd dotu(const cd* a, const cd* b, std::size_t n);
// sum_i conj(a[i]) * b[i]
cd dotc(const cd* a, const cd* b, std::size_t n);
// y[i] += alpha * x[i]
void axpy(cd alpha, const cd* x, cd* y, std::size_t n);
// sum_i |a[i]|^2
double sumsq(const cd* a, std::size_t n);

namespace detail {

cd dotu_scalar(const cd* a, const cd* b, std::size_t n);
cd dotc_scalar(const cd* a, const cd* b, std::size_t n);
void axpy_scalar(cd alpha, const cd* x, cd* y, std::size_t n);
double sumsq_scalar(const cd* a, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
#define RISLINK_HAVE_AVX2_BUILD 1
cd dotu_avx2(const cd* a, const cd* b, std::size_t n);
cd dotc_avx2(const cd* a, const cd* b, std::size_t n);
void axpy_avx2(cd alpha, const cd* x, cd* y, std::size_t n);
double sumsq_avx2(const cd* a, std::size_t n);
#endif

} // namespace detail

} // namespace rislink::kernels
