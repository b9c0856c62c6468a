#include "rislink/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace rislink::kernels {

namespace detail {

cd dotu_scalar(const cd* a, const cd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br - ai * bi;
        im += ar * bi + ai * br;
    }
    return {re, im};
}

cd dotc_scalar(const cd* a, const cd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag();
        const double br = b[i].real(), bi = b[i].imag();
        re += ar * br + ai * bi;
        im += ar * bi - ai * br;
    }
    return {re, im};
}

void axpy_scalar(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double wr = alpha.real(), wi = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] += cd{wr * xr - wi * xi, wr * xi + wi * xr};
    }
}

double sumsq_scalar(const cd* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    }
    return s;
}

} // namespace detail

namespace {

struct Vtable {
    cd (*dotu)(const cd*, const cd*, std::size_t);
    cd (*dotc)(const cd*, const cd*, std::size_t);
    void (*axpy)(cd, const cd*, cd*, std::size_t);
    double (*sumsq)(const cd*, std::size_t);
};

constexpr Vtable kScalar{detail::dotu_scalar, detail::dotc_scalar,
                         detail::axpy_scalar, detail::sumsq_scalar};

#ifdef RISLINK_HAVE_AVX2_BUILD
constexpr Vtable kAvx2{detail::dotu_avx2, detail::dotc_avx2,
                       detail::axpy_avx2, detail::sumsq_avx2};
#endif

bool avx2_available() {
#ifdef RISLINK_HAVE_AVX2_BUILD
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend detect() {
    if (const char* env = std::getenv("RISLINK_FORCE_SCALAR");
        env != nullptr && env[0] != '\0' && env[0] != '0') {
        return Backend::scalar;
    }
    return avx2_available() ? Backend::avx2 : Backend::scalar;
}

Backend g_backend = detect();

const Vtable& table() {
#ifdef RISLINK_HAVE_AVX2_BUILD
    if (g_backend == Backend::avx2) return kAvx2;
#endif
    return kScalar;
}

} // namespace

Backend active_backend() { return g_backend; }

const char* backend_name() {
    return g_backend == Backend::avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::avx2 && !avx2_available()) {
        throw std::runtime_error("kernels: avx2 backend not available on this CPU");
    }
    g_backend = b;
}

void reset_backend() { g_backend = detect(); }

cd dotu(const cd* a, const cd* b, std::size_t n) { return table().dotu(a, b, n); }
cd dotc(const cd* a, const cd* b, std::size_t n) { return table().dotc(a, b, n); }
void axpy(cd alpha, const cd* x, cd* y, std::size_t n) { table().axpy(alpha, x, y, n); }
double sumsq(const cd* a, std::size_t n) { return table().sumsq(a, n); }

} // namespace rislink::kernels
