#include "rislink/ris.hpp"

#include <cmath>
#include <stdexcept>

namespace rislink {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

cd dft_entry(int order, long long power) {
    const long long p = ((power % order) + order) % order;
    const double a = -kTwoPi * static_cast<double>(p) / order;
    return cd{std::cos(a), std::sin(a)};
}

bool is_prime(int q) {
    if (q < 2) return false;
    for (int d = 2; d * d <= q; ++d) {
        if (q % d == 0) return false;
    }
    return true;
}

// Paley type-I core: order q+1 for prime q = 3 (mod 4)
std::vector<std::vector<int>> paley(int q) {
    const int n = q + 1;
    std::vector<char> residue(q, 0);
    for (int a = 1; a < q; ++a) residue[(a * a) % q] = 1;
    auto chi = [&](int a) {
        a = ((a % q) + q) % q;
        if (a == 0) return 0;
        return residue[a] ? 1 : -1;
    };
    std::vector<std::vector<int>> h(n, std::vector<int>(n, 1));
    for (int i = 1; i < n; ++i) h[i][0] = -1;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            h[i][j] = (i == j) ? 1 : chi(j - i);
        }
    }
    return h;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::vector<std::vector<int>> sylvester_double(const std::vector<std::vector<int>>& h) {
    const int n = static_cast<int>(h.size());
    std::vector<std::vector<int>> out(2 * n, std::vector<int>(2 * n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            out[i][j] = h[i][j];
            out[i][j + n] = h[i][j];
            out[i + n][j] = h[i][j];
            out[i + n][j + n] = -h[i][j];
        }
    }
    return out;
}

} // namespace

bool hadamard_order_available(int order) {
    if (order == 1 || order == 2) return true;
    if (order % 4 != 0) return false;
    if (is_prime(order - 1) && (order - 1) % 4 == 3) return true;
    return order % 2 == 0 && hadamard_order_available(order / 2);
}

std::vector<std::vector<int>> hadamard(int order) {
    if (order == 1) return {{1}};
    if (order == 2) return {{1, 1}, {1, -1}};
    if (order % 4 != 0) {
        throw std::invalid_argument("hadamard: no construction for this order");
    }
    // Sylvester structure preferred: its column pattern pairs with the DFT
    // sweep to give exactly orthogonal kronecker measurement columns
    if (is_power_of_two(order)) return sylvester_double(hadamard(order / 2));
    if (is_prime(order - 1) && (order - 1) % 4 == 3) return paley(order - 1);
    if (order % 2 == 0 && hadamard_order_available(order / 2)) {
        return sylvester_double(hadamard(order / 2));
    }
    throw std::invalid_argument("hadamard: no construction for this order");
}

PilotBook build_pilot_symbols(int K, int n_pilot, double sigma_x2) {
    if (K < 1) throw std::invalid_argument("pilot book: K < 1");
    if (n_pilot % 2 != 0 || n_pilot < 2) {
        throw std::invalid_argument("pilot book: N_p must be even and >= 2");
    }
    const int half = n_pilot / 2;
    if (half < K && K > 1) {
        throw std::invalid_argument("pilot book: N_p/2 below user count");
    }
    std::vector<std::vector<int>> had;
    if (K == 1) {
        had.assign(1, std::vector<int>(half, 1));
    } else {
        if (!hadamard_order_available(half)) {
            throw std::invalid_argument("pilot book: no Hadamard order for N_p/2");
        }
        had = hadamard(half);
    }
    // unit-phase rotation keeps each pilot a QPSK point of energy sigma_x2
    const double amp = std::sqrt(sigma_x2 * 0.5);
    const cd scale{amp, amp};
    PilotBook book;
    book.X_p = CMat(K, n_pilot);
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < half; ++j) {
            const cd v = scale * static_cast<double>(had[k][j]);
            book.X_p(k, j) = v;
            book.X_p(k, j + half) = v;
        }
    }
    return book;
}

CMat build_theta_ps(int n_total, int n_ps) {
    if (n_total < 1 || n_ps < 1) throw std::invalid_argument("theta_ps: bad sizes");
    CMat t(n_total, n_ps);
    for (int c = 0; c < n_ps; ++c) {
        for (int r = 0; r < n_total; ++r) {
            t(r, c) = dft_entry(n_ps, static_cast<long long>(r) * c);
        }
    }
    return t;
}

CMat build_theta_star(int n_total, int n_p) {
    if (n_p % 2 != 0 || n_p < 2) {
        throw std::invalid_argument("theta_star: N_p must be even and >= 2");
    }
    const int half = n_p / 2;
    const int order = std::max(n_total, half);
    CMat t(n_total, half);
    for (int c = 0; c < half; ++c) {
        for (int r = 0; r < n_total; ++r) {
            t(r, c) = dft_entry(order, static_cast<long long>(r) * c);
        }
    }
    return t;
}

CMat build_theta_p(int n_total, int n_p) {
    const CMat star = build_theta_star(n_total, n_p);
    const int half = n_p / 2;
    CMat t(n_total, n_p);
    for (int c = 0; c < half; ++c) {
        for (int r = 0; r < n_total; ++r) {
            t(r, c) = star(r, c);
            t(r, c + half) = -star(r, c);
        }
    }
    return t;
}

CMat build_theta_o(const CVec& phi_o, int n_info) {
    if (n_info < 0) throw std::invalid_argument("theta_o: negative column count");
    CMat t(phi_o.size(), n_info);
    for (int c = 0; c < n_info; ++c) t.set_col(c, phi_o);
    return t;
}

ReflectionSchedule build_schedule(int n_total, const PacketLayout& layout,
                                  const CVec& phi_o) {
    if (static_cast<int>(phi_o.size()) != n_total) {
        throw std::invalid_argument("schedule: phi_o length != L*N");
    }
    ReflectionSchedule s;
    s.theta = CMat(n_total, layout.total_symbols());
    s.tags.resize(layout.total_symbols());
    if (layout.n_pilot_sym > 0) {
        const CMat tp = build_theta_p(n_total, layout.n_pilot_sym);
        for (int c = 0; c < layout.n_pilot_sym; ++c) {
            const int dst = layout.pilot_idx[c];
            s.theta.set_col(dst, tp.get_col(c));
            s.tags[dst] = SegTag::pilot;
        }
    }
    for (int c = 0; c < layout.n_info_sym; ++c) {
        const int dst = layout.info_idx[c];
        s.theta.set_col(dst, phi_o);
        s.tags[dst] = SegTag::data;
    }
    if (layout.n_parity_sym > 0) {
        const CMat tps = build_theta_ps(n_total, layout.n_parity_sym);
        for (int c = 0; c < layout.n_parity_sym; ++c) {
            const int dst = layout.parity_idx[c];
            s.theta.set_col(dst, tps.get_col(c));
            s.tags[dst] = SegTag::parity;
        }
    }
    return s;
}

PhiResult optimize_phi(const CMat& W, const std::vector<CMat>& Z, const CMat& h_direct) {
    if (Z.empty()) throw std::invalid_argument("optimize_phi: no cascaded matrices");
    const std::size_t K = Z.size();
    if (W.rows() != K || h_direct.cols() != K || h_direct.rows() != W.cols()) {
        throw std::invalid_argument("optimize_phi: dimension mismatch");
    }
    const std::size_t dim = Z[0].cols();
    CMat beta(dim, dim);
    CVec psi(dim);
    for (std::size_t k = 0; k < K; ++k) {
        const CMat wz = linalg::mul(W, Z[k]);  // K x dim
        beta = linalg::add(beta, linalg::gram_aha(wz));
        CVec resid = linalg::matvec(W, h_direct.get_col(k));
        for (std::size_t i = 0; i < K; ++i) resid[i] = -resid[i];
        resid[k] += cd{1.0, 0.0};
        const CVec contrib = linalg::matvec_ah(wz, resid);
        for (std::size_t i = 0; i < dim; ++i) psi[i] += contrib[i];
    }
    CMat rhs(dim, 1);
    rhs.set_col(0, psi);
    PhiResult out;
    try {
        const CMat sol = linalg::solve_hpd(beta, rhs);
        out.phi = sol.get_col(0);
    } catch (const std::runtime_error&) {
        double tr = 0.0;
        for (std::size_t i = 0; i < dim; ++i) tr += beta(i, i).real();
        const double ridge = 1e-9 * tr / static_cast<double>(dim);
        CMat reg = beta;
        for (std::size_t i = 0; i < dim; ++i) reg(i, i) += ridge;
        const CMat sol = linalg::solve_hpd(reg, rhs);
        out.phi = sol.get_col(0);
        out.ridge_applied = true;
    }
    return out;
}

TruncateResult truncate_passive(const CVec& phi) {
    TruncateResult out;
    out.phi.resize(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double mag = std::abs(phi[i]);
        if (mag > 0.0) {
            out.phi[i] = phi[i] / mag;
        } else {
            out.phi[i] = cd{1.0, 0.0};
            ++out.zero_substitutions;
        }
    }
    return out;
}

CMat build_lambda(const CMat& x_cols, const CMat& phi_cols) {
    if (x_cols.cols() != phi_cols.cols()) {
        throw std::invalid_argument("build_lambda: column count mismatch");
    }
    const std::size_t K = x_cols.rows();
    const std::size_t ln = phi_cols.rows();
    CMat lam(K * ln, x_cols.cols());
    for (std::size_t c = 0; c < x_cols.cols(); ++c) {
        cd* dst = lam.col(c);
        const cd* phi = phi_cols.col(c);
        for (std::size_t k = 0; k < K; ++k) {
            const cd xk = x_cols(k, c);
            for (std::size_t i = 0; i < ln; ++i) dst[k * ln + i] = xk * phi[i];
        }
    }
    return lam;
}

} // namespace rislink
