#include "rislink/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rislink/kernels.hpp"

namespace rislink {

PartitionPair PartitionPair::over(int start, int n_pilot) {
    if (start < 0 || n_pilot < 2 || n_pilot % 2 != 0) {
        throw std::invalid_argument("partition pair: need an even pilot count");
    }
    return PartitionPair{start, n_pilot / 2};
}

PartitionCombined combine_partitions(const CMat& y_pilot, const CMat& x_pilot,
                                     const CMat& phi_pilot) {
    const std::size_t np = y_pilot.cols();
    if (np == 0 || np % 2 != 0 || x_pilot.cols() != np || phi_pilot.cols() != np) {
        throw std::invalid_argument("combine_partitions: pilot block shape mismatch");
    }
    const std::size_t half = np / 2;
    // repeat/sign-flip protocol check
    for (std::size_t j = 0; j < half; ++j) {
        for (std::size_t k = 0; k < x_pilot.rows(); ++k) {
            if (std::abs(x_pilot(k, j) - x_pilot(k, j + half)) > 1e-9 * std::abs(x_pilot(k, j))) {
                throw std::invalid_argument("combine_partitions: pilot symbols not repeated");
            }
        }
        for (std::size_t r = 0; r < phi_pilot.rows(); ++r) {
            if (std::abs(phi_pilot(r, j) + phi_pilot(r, j + half)) > 1e-9) {
                throw std::invalid_argument("combine_partitions: reflection not sign-flipped");
            }
        }
    }
    PartitionCombined out;
    out.sum = CMat(y_pilot.rows(), half);
    out.diff = CMat(y_pilot.rows(), half);
    for (std::size_t j = 0; j < half; ++j) {
        const cd* a = y_pilot.col(j);
        const cd* b = y_pilot.col(j + half);
        cd* s = out.sum.col(j);
        cd* d = out.diff.col(j);
        for (std::size_t r = 0; r < y_pilot.rows(); ++r) {
            s[r] = 0.5 * (a[r] + b[r]);
            d[r] = 0.5 * (a[r] - b[r]);
        }
    }
    return out;
}

namespace detail {

CMat lmmse_direct_form(const CMat& y, const CMat& p, const LmmseModel& model) {
    const std::size_t dim = p.rows();
    const std::size_t T = p.cols();
    if (model.r_diag.size() != dim || y.cols() != T) {
        throw std::invalid_argument("lmmse: shape mismatch");
    }
    const CMat rp = linalg::mul_diag_left(model.r_diag, p);
    const CMat g = linalg::conj_transpose(rp);  // P^H R, T x dim
    CMat a = linalg::mul(g, p);                 // P^H R P
    for (std::size_t i = 0; i < T; ++i) a(i, i) += model.noise_term;
    const CMat s = linalg::solve_hpd(std::move(a), g);
    return linalg::mul(y, s);
}

CMat lmmse_dual_form(const CMat& y, const CMat& p, const LmmseModel& model) {
    const std::size_t dim = p.rows();
    if (model.r_diag.size() != dim || y.cols() != p.cols()) {
        throw std::invalid_argument("lmmse: shape mismatch");
    }
    // Y P^H (R P P^H + cI)^{-1} R  ==  Y P^H D (D P P^H D + cI)^{-1} D
    // with D = sqrt(R), keeping the solve Hermitian positive definite.
    std::vector<double> d(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (model.r_diag[i] < 0.0) throw std::invalid_argument("lmmse: negative covariance");
        d[i] = std::sqrt(model.r_diag[i]);
    }
    CMat core = linalg::gram_aah(p);  // P P^H
    for (std::size_t j = 0; j < dim; ++j) {
        cd* cj = core.col(j);
        for (std::size_t i = 0; i < dim; ++i) cj[i] *= d[i] * d[j];
    }
    for (std::size_t i = 0; i < dim; ++i) core(i, i) += model.noise_term;
    CMat dmat(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) dmat(i, i) = d[i];
    const CMat s = linalg::solve_hpd(std::move(core), dmat);
    return linalg::mul(linalg::mul_abh(y, p), linalg::mul_diag_left(d, s));
}

} // namespace detail

CMat lmmse_estimate(const CMat& y, const CMat& p, const LmmseModel& model) {
    return (p.cols() > p.rows()) ? detail::lmmse_dual_form(y, p, model)
                                 : detail::lmmse_direct_form(y, p, model);
}

namespace {

CMat normalized_copy(const CMat& p, double sigma_x) {
    CMat out = p;
    linalg::scale_inplace(out, cd{1.0 / sigma_x, 0.0});
    return out;
}

} // namespace

CMat estimate_direct(const CMat& sum_half, const PilotBook& book, double sigma_x2,
                     const LmmseModel& model) {
    const std::size_t half = book.X_p.cols() / 2;
    if (sum_half.cols() != half) {
        throw std::invalid_argument("estimate_direct: observation count != N_p/2");
    }
    const double sigma_x = std::sqrt(sigma_x2);
    CMat p(book.X_p.rows(), half);
    for (std::size_t j = 0; j < half; ++j) {
        const cd* src = book.X_p.col(j);
        cd* dst = p.col(j);
        for (std::size_t r = 0; r < p.rows(); ++r) dst[r] = src[r] / sigma_x;
    }
    CMat est = lmmse_estimate(sum_half, p, model);
    linalg::scale_inplace(est, cd{1.0 / sigma_x, 0.0});
    return est;
}

CMat estimate_cascaded(const CMat& y_obs, const CMat& lambda, double sigma_x2,
                       const LmmseModel& model) {
    if (y_obs.cols() != lambda.cols()) {
        throw std::invalid_argument("estimate_cascaded: observation/column mismatch");
    }
    const double sigma_x = std::sqrt(sigma_x2);
    CMat est = lmmse_estimate(y_obs, normalized_copy(lambda, sigma_x), model);
    linalg::scale_inplace(est, cd{1.0 / sigma_x, 0.0});
    return est;
}

double nmse(const CMat& estimate, const CMat& truth) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw std::invalid_argument("nmse: shape mismatch");
    }
    const double denom = linalg::frob_norm_sq(truth);
    if (!(denom > 0.0)) throw std::invalid_argument("nmse: zero-norm truth");
    return linalg::frob_norm_sq(linalg::sub(estimate, truth)) / denom;
}

namespace {

// hbar(phi) = H_hat + [Z_1 phi ... Z_K phi] with Z_k the per-user block of
// the concatenated cascaded estimate
CMat equivalent_from_estimates(const CMat& h_hat, const CMat& z_all, const cd* phi,
                               std::size_t ln) {
    const std::size_t m = h_hat.rows();
    const std::size_t K = h_hat.cols();
    CMat hb = h_hat;
    for (std::size_t k = 0; k < K; ++k) {
        cd* dst = hb.col(k);
        for (std::size_t i = 0; i < ln; ++i) {
            kernels::axpy(phi[i], z_all.col(k * ln + i), dst, m);
        }
    }
    return hb;
}

std::vector<std::vector<std::uint8_t>> known_pilot_bits(const ReceiverContext& ctx) {
    const std::size_t K = ctx.book->X_p.rows();
    const int np = ctx.layout.n_pilot_sym;
    std::vector<std::vector<std::uint8_t>> bits(K, std::vector<std::uint8_t>(2 * np));
    for (std::size_t k = 0; k < K; ++k) {
        for (int j = 0; j < np; ++j) {
            const auto b = hard_demap(ctx.book->X_p(k, j), ctx.constellation);
            bits[k][2 * j] = b[0];
            bits[k][2 * j + 1] = b[1];
        }
    }
    return bits;
}

struct RefinementSystem {
    CMat obs;
    CMat lambda;
    std::vector<char> pilot_or_parity;
};

RefinementSystem build_refinement_system(const CMat& rx, const ReceiverContext& ctx,
                                         const CMat& h_hat, const CMat& x_hat) {
    const PacketLayout& lay = ctx.layout;
    const std::size_t m = rx.rows();
    const std::size_t K = x_hat.rows();
    const std::size_t ln = ctx.schedule->theta.rows();
    const PartitionPair parts = PartitionPair::over(0, lay.n_pilot_sym);
    const int half = parts.half;
    const bool with_data = ctx.include_data_columns;
    const std::size_t T = static_cast<std::size_t>(half) + lay.n_parity_sym +
                          (with_data ? lay.n_info_sym : 0);
    CMat xc(K, T), pc(ln, T);
    RefinementSystem sys;
    sys.obs = CMat(m, T);
    sys.pilot_or_parity.assign(T, 0);
    std::size_t c = 0;
    const double inv_sqrt2 = 0.7071067811865475244;
    const double sqrt2 = 1.4142135623730950488;
    // paired pilots: exact direct-link cancellation, noise equalized to
    // sigma_n2 by the sqrt(2) rescale
    for (int j = 0; j < half; ++j) {
        const cd* a = rx.col(lay.pilot_idx[parts.first(j)]);
        const cd* b = rx.col(lay.pilot_idx[parts.second(j)]);
        cd* o = sys.obs.col(c);
        for (std::size_t r = 0; r < m; ++r) o[r] = inv_sqrt2 * (a[r] - b[r]);
        for (std::size_t k = 0; k < K; ++k) xc(k, c) = sqrt2 * ctx.book->X_p(k, j);
        pc.set_col(c, ctx.schedule->theta.get_col(lay.pilot_idx[j]));
        sys.pilot_or_parity[c] = 1;
        ++c;
    }
    auto add_unpaired = [&](int t, bool is_parity) {
        const CVec xt = x_hat.get_col(t);
        CVec o = rx.get_col(t);
        const CVec hx = linalg::matvec(h_hat, xt);
        for (std::size_t r = 0; r < m; ++r) o[r] -= hx[r];
        sys.obs.set_col(c, o);
        for (std::size_t k = 0; k < K; ++k) xc(k, c) = xt[k];
        pc.set_col(c, ctx.schedule->theta.get_col(t));
        sys.pilot_or_parity[c] = is_parity ? 1 : 0;
        ++c;
    };
    for (int t : lay.parity_idx) add_unpaired(t, true);
    if (with_data) {
        for (int t : lay.info_idx) add_unpaired(t, false);
    }
    sys.lambda = build_lambda(xc, pc);
    return sys;
}

double lambda_pp_condition(const RefinementSystem& sys) {
    std::size_t n_pp = 0;
    for (char f : sys.pilot_or_parity) n_pp += f;
    if (n_pp == 0) return 0.0;
    CMat pp(sys.lambda.rows(), n_pp);
    std::size_t c = 0;
    for (std::size_t j = 0; j < sys.lambda.cols(); ++j) {
        if (sys.pilot_or_parity[j]) pp.set_col(c++, sys.lambda.get_col(j));
    }
    const CMat g = (pp.cols() <= pp.rows()) ? linalg::gram_aha(pp) : linalg::gram_aah(pp);
    const auto [emax, emin] = linalg::extreme_eigs_hpsd(g);
    if (!(emin > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(emax / emin);
}

} // namespace

IddResult detect_and_decode(const CMat& rx, const CMat& h_hat, const CMat& z_all_hat,
                            const ReceiverContext& ctx) {
    const PacketLayout& lay = ctx.layout;
    const std::size_t K = h_hat.cols();
    const std::size_t ln = ctx.schedule->theta.rows();
    const int n = ctx.code->n();
    const int kbits = ctx.code->k();
    const int T = lay.total_symbols();
    if (rx.cols() != static_cast<std::size_t>(T)) {
        throw std::invalid_argument("detect_and_decode: packet length mismatch");
    }

    // channel matrices per non-pilot instant; the data segment shares one
    std::vector<int> active;
    active.reserve(lay.n_info_sym + lay.n_parity_sym);
    for (int t : lay.info_idx) active.push_back(t);
    for (int t : lay.parity_idx) active.push_back(t);
    CMat hbar_data;
    if (lay.n_info_sym > 0) {
        hbar_data = equivalent_from_estimates(h_hat, z_all_hat,
                                              ctx.schedule->theta.col(lay.info_idx[0]), ln);
    }
    std::vector<CMat> hbar_parity;
    hbar_parity.reserve(lay.parity_idx.size());
    for (int t : lay.parity_idx) {
        hbar_parity.push_back(
            equivalent_from_estimates(h_hat, z_all_hat, ctx.schedule->theta.col(t), ln));
    }
    const auto pilot_bits = (lay.n_pilot_sym > 0)
                                ? known_pilot_bits(ctx)
                                : std::vector<std::vector<std::uint8_t>>(
                                      K, std::vector<std::uint8_t>{});

    std::vector<std::vector<double>> prior(K, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> chan_llr(K, std::vector<double>(n, 0.0));
    std::vector<LdpcCode::DecodeResult> last(K);

    for (int pass = 0; pass < ctx.idd_iterations; ++pass) {
        PriorBank bank;
        bank.symbols.resize(K);
        std::size_t parity_i = 0;
        for (int idx = 0; idx < static_cast<int>(active.size()); ++idx) {
            const int t = active[idx];
            for (std::size_t k = 0; k < K; ++k) {
                bank.symbols[k] =
                    soft_symbol(prior[k][2 * t], prior[k][2 * t + 1], ctx.constellation);
            }
            const CMat& hb = (ctx.schedule->tags[t] == SegTag::data)
                                 ? hbar_data
                                 : hbar_parity[parity_i];
            if (ctx.schedule->tags[t] == SegTag::parity) ++parity_i;
            const DetectionResult det =
                sic_detect(rx.get_col(t), hb, bank, ctx.sigma_n2, ctx.sigma_x2);
            for (std::size_t k = 0; k < K; ++k) {
                chan_llr[k][2 * t] = det.llr[k][0];
                chan_llr[k][2 * t + 1] = det.llr[k][1];
            }
        }
        for (std::size_t k = 0; k < K; ++k) {
            for (int j = 0; j < lay.n_pilot_sym; ++j) {
                const int t = lay.pilot_idx[j];
                chan_llr[k][2 * t] = pilot_bits[k][2 * j] ? -kLlrClamp : kLlrClamp;
                chan_llr[k][2 * t + 1] = pilot_bits[k][2 * j + 1] ? -kLlrClamp : kLlrClamp;
            }
            last[k] = ctx.code->bp_decode(chan_llr[k], ctx.bp_max_iters);
            prior[k] = last[k].extrinsic;
        }
    }

    IddResult out;
    out.codewords.resize(K);
    out.converged.resize(K);
    out.symbols = CMat(K, T);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<std::uint8_t> msg(last[k].hard.begin(), last[k].hard.begin() + kbits);
        for (int j = 0; j < lay.n_pilot_sym; ++j) {
            msg[2 * j] = pilot_bits[k][2 * j];
            msg[2 * j + 1] = pilot_bits[k][2 * j + 1];
        }
        out.codewords[k] = ctx.code->encode(msg);
        out.converged[k] = last[k].converged;
        const auto sym = map_bits(out.codewords[k], ctx.constellation);
        for (int t = 0; t < T; ++t) out.symbols(k, t) = sym[t];
    }
    return out;
}

ReceiverResult iterative_refine(const CMat& rx, const ReceiverContext& ctx) {
    if (ctx.code == nullptr || ctx.book == nullptr || ctx.schedule == nullptr) {
        throw std::invalid_argument("iterative_refine: incomplete context");
    }
    const PacketLayout& lay = ctx.layout;
    if (lay.n_pilot_sym < 2) {
        throw std::invalid_argument("iterative_refine: needs at least one pilot pair");
    }
    const int half = lay.n_pilot_sym / 2;
    const std::size_t K = ctx.book->X_p.rows();

    // collect pilot-instant observations / schedule columns in pilot order
    CMat y_pilot(rx.rows(), lay.n_pilot_sym);
    CMat phi_pilot(ctx.schedule->theta.rows(), lay.n_pilot_sym);
    for (int j = 0; j < lay.n_pilot_sym; ++j) {
        y_pilot.set_col(j, rx.get_col(lay.pilot_idx[j]));
        phi_pilot.set_col(j, ctx.schedule->theta.get_col(lay.pilot_idx[j]));
    }
    const PartitionCombined parts = combine_partitions(y_pilot, ctx.book->X_p, phi_pilot);

    ReceiverResult res;
    res.est.H_hat = estimate_direct(parts.sum, *ctx.book, ctx.sigma_x2, ctx.direct_model);

    CMat x_first(K, half), phi_first(phi_pilot.rows(), half);
    for (int j = 0; j < half; ++j) {
        x_first.set_col(j, ctx.book->X_p.get_col(j));
        phi_first.set_col(j, phi_pilot.get_col(j));
    }
    const CMat lambda_coarse = build_lambda(x_first, phi_first);
    res.est.Z_all_hat =
        estimate_cascaded(parts.diff, lambda_coarse, ctx.sigma_x2, ctx.cascaded_model);
    if (ctx.truth_z_all != nullptr) {
        res.est.nmse_coarse = nmse(res.est.Z_all_hat, *ctx.truth_z_all);
    }

    LmmseModel refine_model;
    refine_model.r_diag = ctx.cascaded_model.r_diag;
    refine_model.noise_term = ctx.refine_noise_term;

    bool have_system = false;
    RefinementSystem sys;
    for (int it = 1; it <= ctx.max_refinements; ++it) {
        CMat x_hat;
        if (ctx.genie_symbols != nullptr) {
            x_hat = *ctx.genie_symbols;
        } else {
            const IddResult idd = detect_and_decode(rx, res.est.H_hat, res.est.Z_all_hat, ctx);
            bool all_ok = true;
            for (bool c : idd.converged) all_ok = all_ok && c;
            if (ctx.exclude_unconverged && !all_ok) {
                res.refinement_skipped = true;
                break;
            }
            x_hat = idd.symbols;
        }
        sys = build_refinement_system(rx, ctx, res.est.H_hat, x_hat);
        have_system = true;
        const CMat z_new = estimate_cascaded(sys.obs, sys.lambda, ctx.sigma_x2, refine_model);
        const double prev_norm = linalg::frob_norm_sq(res.est.Z_all_hat);
        const double change =
            prev_norm > 0.0
                ? std::sqrt(linalg::frob_norm_sq(linalg::sub(z_new, res.est.Z_all_hat)) /
                            prev_norm)
                : std::numeric_limits<double>::infinity();
        res.est.Z_all_hat = z_new;
        res.est.change_trace.push_back(change);
        if (ctx.truth_z_all != nullptr) {
            res.est.nmse_trace.push_back(nmse(res.est.Z_all_hat, *ctx.truth_z_all));
        }
        res.est.iterations_used = it;
        if (change < ctx.tol) break;
    }

    res.lambda_cond = have_system
                          ? lambda_pp_condition(sys)
                          : lambda_pp_condition(RefinementSystem{
                                parts.diff, lambda_coarse,
                                std::vector<char>(lambda_coarse.cols(), 1)});

    if (ctx.genie_symbols == nullptr) {
        const IddResult final_idd =
            detect_and_decode(rx, res.est.H_hat, res.est.Z_all_hat, ctx);
        res.hard_bits = final_idd.codewords;
        res.converged = final_idd.converged;
    }
    return res;
}

} // namespace rislink
