#pragma once

/// Dense column-major complex matrices and the small set of factorizations the
/// receiver needs. Inner loops run on the dispatched kernels (contiguous
/// column axpy / dot products).

#include <cstddef>
#include <utility>
#include <vector>

#include "rislink/common.hpp"

namespace rislink {

using CVec = std::vector<cd>;

class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static CMat identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    cd& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    const cd& operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    cd* col(std::size_t c) { return data_.data() + c * rows_; }
    const cd* col(std::size_t c) const { return data_.data() + c * rows_; }

    cd* data() { return data_.data(); }
    const cd* data() const { return data_.data(); }

    void set_col(std::size_t c, const CVec& v);
    CVec get_col(std::size_t c) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cd> data_;
};

namespace linalg {

CMat conj_transpose(const CMat& a);

CMat add(const CMat& a, const CMat& b);
CMat sub(const CMat& a, const CMat& b);
void scale_inplace(CMat& a, cd s);

// c = a * b
CMat mul(const CMat& a, const CMat& b);
// c = a^H * b
CMat mul_ahb(const CMat& a, const CMat& b);
// c = a * b^H
CMat mul_abh(const CMat& a, const CMat& b);
// a * a^H, Hermitian, built from rank-1 column updates
CMat gram_aah(const CMat& a);
// a^H * a
CMat gram_aha(const CMat& a);

CVec matvec(const CMat& a, const CVec& x);
// a^H * x
CVec matvec_ah(const CMat& a, const CVec& x);

double frob_norm_sq(const CMat& a);
double frob_norm_sq(const CVec& a);

// Right-scale by a real diagonal: a * diag(d)
CMat mul_diag_right(const CMat& a, const std::vector<double>& d);
// Left-scale by a real diagonal: diag(d) * a
CMat mul_diag_left(const std::vector<double>& d, const CMat& a);

// Solves A X = B for Hermitian positive definite A (in-place Cholesky on a
// copy). Throws std::runtime_error if the factorization breaks down.
CMat solve_hpd(CMat a, CMat b);
// Partial-pivot LU solve for general square A.
CMat solve_lu(CMat a, CMat b);

// Largest / smallest eigenvalue of a Hermitian PSD matrix via power and
// Cholesky-shifted inverse power iteration. Used for condition logging.
std::pair<double, double> extreme_eigs_hpsd(const CMat& s, int iters = 40);

} // namespace linalg

} // namespace rislink
