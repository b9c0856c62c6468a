#include "rislink/mat.hpp"

#include <cmath>
#include <stdexcept>

#include "rislink/kernels.hpp"

namespace rislink {

CMat CMat::identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = cd{1.0, 0.0};
    return m;
}

void CMat::set_col(std::size_t c, const CVec& v) {
    if (v.size() != rows_) throw std::invalid_argument("set_col: length mismatch");
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

CVec CMat::get_col(std::size_t c) const {
    return CVec(col(c), col(c) + rows_);
}

namespace linalg {

namespace {

void check_same_shape(const CMat& a, const CMat& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
}

} // namespace

CMat conj_transpose(const CMat& a) {
    CMat c(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        for (std::size_t i = 0; i < a.rows(); ++i) {
            c(j, i) = std::conj(a(i, j));
        }
    }
    return c;
}

CMat add(const CMat& a, const CMat& b) {
    check_same_shape(a, b, "add");
    CMat c = a;
    kernels::axpy(cd{1.0, 0.0}, b.data(), c.data(), b.rows() * b.cols());
    return c;
}

CMat sub(const CMat& a, const CMat& b) {
    check_same_shape(a, b, "sub");
    CMat c = a;
    kernels::axpy(cd{-1.0, 0.0}, b.data(), c.data(), b.rows() * b.cols());
    return c;
}

void scale_inplace(CMat& a, cd s) {
    cd* p = a.data();
    for (std::size_t i = 0, n = a.rows() * a.cols(); i < n; ++i) p[i] *= s;
}

CMat mul(const CMat& a, const CMat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("mul: inner dim mismatch");
    CMat c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        cd* cj = c.col(j);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cd w = b(k, j);
            if (w == cd{}) continue;
            kernels::axpy(w, a.col(k), cj, a.rows());
        }
    }
    return c;
}

CMat mul_ahb(const CMat& a, const CMat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("mul_ahb: dim mismatch");
    CMat c(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            c(i, j) = kernels::dotc(a.col(i), b.col(j), a.rows());
        }
    }
    return c;
}

CMat mul_abh(const CMat& a, const CMat& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("mul_abh: dim mismatch");
    CMat c(a.rows(), b.rows());
    // c = sum_k a_col_k * (b_col_k)^H, rank-1 column updates
    for (std::size_t k = 0; k < a.cols(); ++k) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            kernels::axpy(std::conj(b(j, k)), a.col(k), c.col(j), a.rows());
        }
    }
    return c;
}

CMat gram_aah(const CMat& a) {
    const std::size_t m = a.rows();
    CMat c(m, m);
    for (std::size_t k = 0; k < a.cols(); ++k) {
        const cd* ak = a.col(k);
        for (std::size_t j = 0; j < m; ++j) {
            // lower triangle only, mirrored afterwards
            kernels::axpy(std::conj(ak[j]), ak + j, c.col(j) + j, m - j);
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        c(j, j) = cd{c(j, j).real(), 0.0};
        for (std::size_t i = j + 1; i < m; ++i) c(j, i) = std::conj(c(i, j));
    }
    return c;
}

CMat gram_aha(const CMat& a) {
    const std::size_t n = a.cols();
    CMat c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = j; i < n; ++i) {
            const cd v = kernels::dotc(a.col(i), a.col(j), a.rows());
            c(i, j) = v;
            c(j, i) = std::conj(v);
        }
        c(j, j) = cd{c(j, j).real(), 0.0};
    }
    return c;
}

CVec matvec(const CMat& a, const CVec& x) {
    if (x.size() != a.cols()) throw std::invalid_argument("matvec: dim mismatch");
    CVec y(a.rows());
    for (std::size_t k = 0; k < a.cols(); ++k) {
        kernels::axpy(x[k], a.col(k), y.data(), a.rows());
    }
    return y;
}

CVec matvec_ah(const CMat& a, const CVec& x) {
    if (x.size() != a.rows()) throw std::invalid_argument("matvec_ah: dim mismatch");
    CVec y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) {
        y[j] = kernels::dotc(a.col(j), x.data(), a.rows());
    }
    return y;
}

double frob_norm_sq(const CMat& a) {
    return kernels::sumsq(a.data(), a.rows() * a.cols());
}

double frob_norm_sq(const CVec& a) {
    return kernels::sumsq(a.data(), a.size());
}

CMat mul_diag_right(const CMat& a, const std::vector<double>& d) {
    if (d.size() != a.cols()) throw std::invalid_argument("mul_diag_right: dim mismatch");
    CMat c = a;
    for (std::size_t j = 0; j < c.cols(); ++j) {
        cd* cj = c.col(j);
        for (std::size_t i = 0; i < c.rows(); ++i) cj[i] *= d[j];
    }
    return c;
}

CMat mul_diag_left(const std::vector<double>& d, const CMat& a) {
    if (d.size() != a.rows()) throw std::invalid_argument("mul_diag_left: dim mismatch");
    CMat c = a;
    for (std::size_t j = 0; j < c.cols(); ++j) {
        cd* cj = c.col(j);
        for (std::size_t i = 0; i < c.rows(); ++i) cj[i] *= d[i];
    }
    return c;
}

namespace {

// In-place lower Cholesky, right-looking so the trailing updates are
// contiguous column axpys.
void cholesky_inplace(CMat& a) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const double dkk = a(k, k).real();
        if (!(dkk > 0.0) || !std::isfinite(dkk)) {
            throw std::runtime_error("cholesky: matrix not positive definite");
        }
        const double lkk = std::sqrt(dkk);
        a(k, k) = cd{lkk, 0.0};
        const double inv = 1.0 / lkk;
        for (std::size_t i = k + 1; i < n; ++i) a(i, k) *= inv;
        for (std::size_t j = k + 1; j < n; ++j) {
            kernels::axpy(-std::conj(a(j, k)), a.col(k) + j, a.col(j) + j, n - j);
        }
    }
}

void forward_subst_lower(const CMat& l, CMat& b) {
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c) {
        cd* bc = b.col(c);
        for (std::size_t k = 0; k < n; ++k) {
            bc[k] /= l(k, k);
            if (k + 1 < n) kernels::axpy(-bc[k], l.col(k) + k + 1, bc + k + 1, n - k - 1);
        }
    }
}

void back_subst_lower_h(const CMat& l, CMat& b) {
    // solves L^H x = b
    const std::size_t n = l.rows();
    for (std::size_t c = 0; c < b.cols(); ++c) {
        cd* bc = b.col(c);
        for (std::size_t kk = n; kk-- > 0;) {
            cd s = bc[kk];
            if (kk + 1 < n) s -= kernels::dotc(l.col(kk) + kk + 1, bc + kk + 1, n - kk - 1);
            bc[kk] = s / l(kk, kk);
        }
    }
}

} // namespace

CMat solve_hpd(CMat a, CMat b) {
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw std::invalid_argument("solve_hpd: shape mismatch");
    }
    cholesky_inplace(a);
    forward_subst_lower(a, b);
    back_subst_lower_h(a, b);
    return b;
}

CMat solve_lu(CMat a, CMat b) {
    const std::size_t n = a.rows();
    if (a.rows() != a.cols() || n != b.rows()) {
        throw std::invalid_argument("solve_lu: shape mismatch");
    }
    std::vector<std::size_t> piv(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::norm(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::norm(a(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (!(best > 0.0)) throw std::runtime_error("lu: singular matrix");
        piv[k] = p;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
        }
        const cd inv = cd{1.0, 0.0} / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) a(i, k) *= inv;
        for (std::size_t j = k + 1; j < n; ++j) {
            kernels::axpy(-a(k, j), a.col(k) + k + 1, a.col(j) + k + 1, n - k - 1);
        }
    }
    // forward (unit lower) then back substitution
    for (std::size_t c = 0; c < b.cols(); ++c) {
        cd* bc = b.col(c);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            kernels::axpy(-bc[k], a.col(k) + k + 1, bc + k + 1, n - k - 1);
        }
        for (std::size_t kk = n; kk-- > 0;) {
            cd s = bc[kk];
            for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * bc[j];
            bc[kk] = s / a(kk, kk);
        }
    }
    return b;
}

std::pair<double, double> extreme_eigs_hpsd(const CMat& s, int iters) {
    const std::size_t n = s.rows();
    if (n == 0) return {0.0, 0.0};
    CVec v(n, cd{1.0, 0.0});
    double lam_max = 0.0;
    for (int it = 0; it < iters; ++it) {
        CVec w = matvec(s, v);
        const double nw = std::sqrt(frob_norm_sq(w));
        if (nw <= 0.0) { lam_max = 0.0; break; }
        for (auto& x : w) x /= nw;
        lam_max = nw;
        v = std::move(w);
    }
    // inverse power iteration with a tiny relative shift to survive
    // semi-definite inputs; a failed factorization means lam_min ~ 0
    double lam_min = 0.0;
    const double shift = 1e-14 * (lam_max > 0 ? lam_max : 1.0);
    CMat shifted = s;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += shift;
    try {
        CMat rhs(n, 1);
        for (std::size_t i = 0; i < n; ++i) rhs(i, 0) = cd{1.0, 0.0};
        double growth = 0.0;
        for (int it = 0; it < iters; ++it) {
            CMat w = solve_hpd(shifted, rhs);
            const double nw = std::sqrt(frob_norm_sq(w));
            if (nw <= 0.0 || !std::isfinite(nw)) return {lam_max, 0.0};
            for (std::size_t i = 0; i < n; ++i) rhs(i, 0) = w(i, 0) / nw;
            growth = nw;
        }
        lam_min = growth > 0.0 ? 1.0 / growth : 0.0;
    } catch (const std::runtime_error&) {
        lam_min = 0.0;
    }
    return {lam_max, lam_min};
}

} // namespace linalg

} // namespace rislink
