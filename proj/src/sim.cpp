#include "rislink/sim.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace rislink {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double SimConfig::sigma_n2() const {
    return dbm_to_watt(noise_dbm_per_hz) * bandwidth_hz;
}

void SimConfig::validate() const {
    geometry.validate();
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (pt_grid_dbm.empty()) throw std::invalid_argument("config: empty power grid");
    if (code_n < 2 || code_column_weight < 2) {
        throw std::invalid_argument("config: invalid code parameters");
    }
    if (!(code_rate > 0.0 && code_rate < 1.0)) {
        throw std::invalid_argument("config: rate must be in (0,1)");
    }
    if (n_pilot < 0) throw std::invalid_argument("config: negative pilot count");
    if (mode == EstimatorMode::proposed && n_pilot < 2) {
        throw std::invalid_argument("config: proposed mode needs at least one pilot pair");
    }
    if (idd_iterations < 1 || bp_max_iters < 1) {
        throw std::invalid_argument("config: iteration counts must be positive");
    }
    if (ce_iterations < 0) throw std::invalid_argument("config: negative rho");
    if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
    if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("config: bandwidth must be positive");
    if (threads < 0) throw std::invalid_argument("config: negative thread count");
    // layout must be feasible
    make_packet_layout(code_n, code_rate,
                       mode == EstimatorMode::proposed ? n_pilot : 0, kBitsPerSymbol);
}

SimConfig default_config() {
    SimConfig cfg;
    cfg.geometry.ap_position = {0.0, 0.0, 0.0};
    cfg.geometry.ris_positions = {{500.0, 10.0, 0.0}, {500.0, -10.0, 0.0}};
    cfg.geometry.user_center = {500.0, 0.0, 0.0};
    cfg.geometry.user_radius = 5.0;
    cfg.geometry.M = 8;
    cfg.geometry.K = 4;
    cfg.geometry.L = 2;
    cfg.geometry.N = 16;
    cfg.pt_grid_dbm = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
    return cfg;
}

namespace {

std::uint64_t pt_key(double pt_dbm) { return std::bit_cast<std::uint64_t>(pt_dbm); }

std::vector<double> casc_gain_diag(const ChannelSet& ch) {
    const int K = ch.K(), L = ch.L(), N = ch.N();
    std::vector<double> r(static_cast<std::size_t>(K) * L * N);
    for (int k = 0; k < K; ++k) {
        for (int j = 0; j < L; ++j) {
            const double g = ch.gains.ap_ris[j] * ch.gains.ris_user[j][k];
            for (int n = 0; n < N; ++n) {
                r[(static_cast<std::size_t>(k) * L + j) * N + n] = g;
            }
        }
    }
    return r;
}

CVec data_phi(const SimConfig& cfg, const ChannelSet& ch, const CascadedMatrices& casc) {
    const std::size_t ln = static_cast<std::size_t>(cfg.geometry.L) * cfg.geometry.N;
    if (cfg.phi_data == PhiDataMode::ones) return CVec(ln, cd{1.0, 0.0});
    // classical MMSE filter bank for the all-ones reflection, then the
    // least-squares reflection design projected onto the unit circle
    const CMat h_ref = equivalent_channel(ch, CVec(ln, cd{1.0, 0.0}));
    const std::size_t m = h_ref.rows();
    double reg = ch.sigma_n2 / ch.sigma_x2;
    if (!(reg > 0.0)) {
        reg = 1e-12 * linalg::frob_norm_sq(h_ref) / static_cast<double>(m);
        if (!(reg > 0.0)) reg = 1e-30;
    }
    CMat a = linalg::gram_aah(h_ref);
    for (std::size_t i = 0; i < m; ++i) a(i, i) += reg;
    const CMat wh = linalg::solve_hpd(std::move(a), h_ref);  // columns (..)^-1 h_k
    const CMat w = linalg::conj_transpose(wh);               // rows w_k^H
    const PhiResult opt = optimize_phi(w, casc.Z, ch.H);
    return truncate_passive(opt.phi).phi;
}

double info_ber(const std::vector<std::vector<std::uint8_t>>& decoded,
                const std::vector<std::vector<std::uint8_t>>& info_bits,
                const PacketLayout& lay) {
    if (lay.n_info_sym == 0 || decoded.empty()) return 0.0;
    long errors = 0;
    long total = 0;
    for (std::size_t k = 0; k < decoded.size(); ++k) {
        for (int i = 0; i < lay.n_info_sym; ++i) {
            const int t = lay.info_idx[i];
            errors += decoded[k][2 * t] != info_bits[k][2 * i];
            errors += decoded[k][2 * t + 1] != info_bits[k][2 * i + 1];
            total += 2;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(total);
}

ReceiverContext make_context(const SimConfig& cfg, const TrialSetup& setup,
                             const LdpcCode& code, double sigma_x2) {
    ReceiverContext ctx;
    ctx.code = &code;
    ctx.layout = setup.layout;
    ctx.constellation = Constellation::qpsk(sigma_x2);
    ctx.book = &setup.book;
    ctx.schedule = &setup.schedule;
    ctx.sigma_n2 = setup.ch.sigma_n2;
    ctx.sigma_x2 = sigma_x2;
    ctx.direct_model.r_diag = setup.ch.gains.direct;
    ctx.direct_model.noise_term = setup.ch.sigma_n2 / (2.0 * sigma_x2);
    ctx.cascaded_model.r_diag = casc_gain_diag(setup.ch);
    ctx.cascaded_model.noise_term = setup.ch.sigma_n2 / (2.0 * sigma_x2);
    ctx.refine_noise_term = setup.ch.sigma_n2 / sigma_x2;
    ctx.idd_iterations = cfg.idd_iterations;
    ctx.bp_max_iters = cfg.bp_max_iters;
    ctx.max_refinements = cfg.ce_iterations;
    ctx.tol = cfg.tol;
    ctx.include_data_columns = cfg.include_data_columns;
    ctx.exclude_unconverged = cfg.exclude_unconverged;
    ctx.truth_z_all = &setup.casc.Z_all;
    return ctx;
}

} // namespace

TrialSetup make_trial_setup(const SimConfig& cfg, double pt_dbm, int trial_index,
                            const LdpcCode& code) {
    const double sigma_x2 = dbm_to_watt(pt_dbm);
    const double sigma_n2 = cfg.sigma_n2();
    Rng rng = Rng::derive(cfg.seed, pt_key(pt_dbm), static_cast<std::uint64_t>(trial_index));

    TrialSetup s;
    s.ch = draw_channels(cfg.geometry, cfg.scenario, sigma_n2, sigma_x2, rng,
                         cfg.direct_extra_loss_db);
    s.casc = cascaded_matrices(s.ch);

    const int np = cfg.mode == EstimatorMode::proposed ? cfg.n_pilot : 0;
    s.layout = make_packet_layout(cfg.code_n, cfg.code_rate, np, kBitsPerSymbol);
    const Constellation cons = Constellation::qpsk(sigma_x2);
    const int K = cfg.geometry.K;

    if (np > 0) {
        s.book = build_pilot_symbols(K, np, sigma_x2);
    } else {
        s.book.X_p = CMat(K, 0);
    }
    const CVec phi_o = data_phi(cfg, s.ch, s.casc);
    s.schedule = build_schedule(cfg.geometry.L * cfg.geometry.N, s.layout, phi_o);

    const int n_info_bits = 2 * s.layout.n_info_sym;
    s.info_bits.resize(K);
    s.codewords.resize(K);
    s.symbols = CMat(K, s.layout.total_symbols());
    for (int k = 0; k < K; ++k) {
        s.info_bits[k].resize(n_info_bits);
        for (int b = 0; b < n_info_bits; ++b) {
            s.info_bits[k][b] = static_cast<std::uint8_t>(rng.next_u64() & 1u);
        }
        std::vector<std::uint8_t> msg(code.k());
        for (int j = 0; j < s.layout.n_pilot_sym; ++j) {
            const auto pb = hard_demap(s.book.X_p(k, j), cons);
            msg[2 * j] = pb[0];
            msg[2 * j + 1] = pb[1];
        }
        std::copy(s.info_bits[k].begin(), s.info_bits[k].end(),
                  msg.begin() + 2 * s.layout.n_pilot_sym);
        s.codewords[k] = code.encode(msg);
        const auto sym = map_bits(s.codewords[k], cons);
        for (int t = 0; t < s.layout.total_symbols(); ++t) s.symbols(k, t) = sym[t];
    }
    s.rx = synthesize_rx(s.ch, s.schedule.theta, s.symbols, rng);
    return s;
}

namespace {

TrialRecord run_trial_proposed(const SimConfig& cfg, double pt_dbm, int trial_index,
                               const LdpcCode& code) {
    const double sigma_x2 = dbm_to_watt(pt_dbm);
    const TrialSetup setup = make_trial_setup(cfg, pt_dbm, trial_index, code);
    ReceiverContext ctx = make_context(cfg, setup, code, sigma_x2);

    TrialRecord rec;
    rec.pilots_used = cfg.n_pilot;

    if (cfg.genie_csi) {
        const IddResult idd = detect_and_decode(setup.rx, setup.ch.H, setup.casc.Z_all, ctx);
        rec.ber = info_ber(idd.codewords, setup.info_bits, setup.layout);
        for (bool c : idd.converged) rec.converged_users += c;
        return rec;
    }

    const ReceiverResult out = iterative_refine(setup.rx, ctx);
    rec.nmse_cascaded = nmse(out.est.Z_all_hat, setup.casc.Z_all);
    rec.nmse_direct = (cfg.scenario == Scenario::los) ? nmse(out.est.H_hat, setup.ch.H) : 0.0;
    rec.ber = info_ber(out.hard_bits, setup.info_bits, setup.layout);
    rec.iterations_used = out.est.iterations_used;
    rec.lambda_cond = out.lambda_cond;
    rec.nmse_coarse = out.est.nmse_coarse;
    rec.nmse_trace = out.est.nmse_trace;
    for (bool c : out.converged) rec.converged_users += c;
    return rec;
}

TrialRecord run_trial_onoff(const SimConfig& cfg, double pt_dbm, int trial_index,
                            const LdpcCode& code) {
    const double sigma_x2 = dbm_to_watt(pt_dbm);
    const double sigma_n2 = cfg.sigma_n2();
    const int K = cfg.geometry.K;
    const int ln = cfg.geometry.L * cfg.geometry.N;
    Rng rng = Rng::derive(cfg.seed, pt_key(pt_dbm) ^ 0x0F0Full,
                          static_cast<std::uint64_t>(trial_index));

    // shared channel realization with the proposed mode at equal (seed, pt,
    // trial): redraw with the same derivation as make_trial_setup
    Rng chan_rng = Rng::derive(cfg.seed, pt_key(pt_dbm), static_cast<std::uint64_t>(trial_index));
    ChannelSet ch = draw_channels(cfg.geometry, cfg.scenario, sigma_n2, sigma_x2, chan_rng,
                                  cfg.direct_extra_loss_db);
    const CascadedMatrices casc = cascaded_matrices(ch);
    const Constellation cons = Constellation::qpsk(sigma_x2);

    TrialRecord rec;

    // direct-link preamble: 2K sign-flipped pilot pairs
    const int np_dir = 2 * K;
    const PilotBook dir_book = build_pilot_symbols(K, np_dir, sigma_x2);
    const CMat theta_dir = build_theta_p(ln, np_dir);
    const CMat y_dir = synthesize_rx(ch, theta_dir, dir_book.X_p, rng);
    const PartitionCombined parts = combine_partitions(y_dir, dir_book.X_p, theta_dir);
    LmmseModel dmodel;
    dmodel.r_diag = ch.gains.direct;
    dmodel.noise_term = sigma_n2 / (2.0 * sigma_x2);
    const CMat h_hat = estimate_direct(parts.sum, dir_book, sigma_x2, dmodel);

    // reflected-link preamble: Hadamard users x full DFT sweep, block paired
    int q = 1;
    while (q < K || !hadamard_order_available(q)) ++q;
    const auto had = hadamard(q);
    const double amp = std::sqrt(sigma_x2 * 0.5);
    const cd scale{amp, amp};
    const int t_refl = q * ln;
    CMat x_refl(K, t_refl), phi_refl(ln, t_refl);
    const CMat dft = build_theta_ps(ln, ln);
    for (int a = 0; a < q; ++a) {
        for (int b = 0; b < ln; ++b) {
            const int c = a * ln + b;
            for (int k = 0; k < K; ++k) {
                x_refl(k, c) = scale * static_cast<double>(had[k][a]);
            }
            phi_refl.set_col(c, dft.get_col(b));
        }
    }
    const CMat y_refl = synthesize_rx(ch, phi_refl, x_refl, rng);
    CMat obs = linalg::sub(y_refl, linalg::mul(h_hat, x_refl));
    const CMat lambda = build_lambda(x_refl, phi_refl);
    LmmseModel cmodel;
    cmodel.r_diag = casc_gain_diag(ch);
    cmodel.noise_term = sigma_n2 / sigma_x2;
    const CMat z_hat = estimate_cascaded(obs, lambda, sigma_x2, cmodel);

    rec.pilots_used = np_dir + t_refl;
    rec.nmse_cascaded = nmse(z_hat, casc.Z_all);
    rec.nmse_direct = (cfg.scenario == Scenario::los) ? nmse(h_hat, ch.H) : 0.0;
    {
        const CMat g = (lambda.cols() <= lambda.rows()) ? linalg::gram_aha(lambda)
                                                        : linalg::gram_aah(lambda);
        const auto [emax, emin] = linalg::extreme_eigs_hpsd(g);
        rec.lambda_cond = emin > 0.0 ? std::sqrt(emax / emin)
                                     : std::numeric_limits<double>::infinity();
    }

    // data packet without encoded pilots, detected with the baseline estimates
    const PacketLayout lay = make_packet_layout(cfg.code_n, cfg.code_rate, 0, kBitsPerSymbol);
    const CVec phi_o = data_phi(cfg, ch, casc);
    const ReflectionSchedule sched = build_schedule(ln, lay, phi_o);
    std::vector<std::vector<std::uint8_t>> info_bits(K);
    CMat symbols(K, lay.total_symbols());
    for (int k = 0; k < K; ++k) {
        info_bits[k].resize(2 * lay.n_info_sym);
        for (auto& b : info_bits[k]) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);
        const auto cw = code.encode(info_bits[k]);
        const auto sym = map_bits(cw, cons);
        for (int t = 0; t < lay.total_symbols(); ++t) symbols(k, t) = sym[t];
    }
    const CMat rx = synthesize_rx(ch, sched.theta, symbols, rng);

    PilotBook empty_book;
    empty_book.X_p = CMat(K, 0);
    ReceiverContext ctx;
    ctx.code = &code;
    ctx.layout = lay;
    ctx.constellation = cons;
    ctx.book = &empty_book;
    ctx.schedule = &sched;
    ctx.sigma_n2 = sigma_n2;
    ctx.sigma_x2 = sigma_x2;
    ctx.idd_iterations = cfg.idd_iterations;
    ctx.bp_max_iters = cfg.bp_max_iters;
    const IddResult idd = detect_and_decode(rx, cfg.genie_csi ? ch.H : h_hat,
                                            cfg.genie_csi ? casc.Z_all : z_hat, ctx);
    rec.ber = info_ber(idd.codewords, info_bits, lay);
    for (bool c : idd.converged) rec.converged_users += c;
    return rec;
}

} // namespace

TrialRecord run_trial(const SimConfig& cfg, double pt_dbm, int trial_index,
                      const LdpcCode& code) {
    cfg.validate();
    return cfg.mode == EstimatorMode::proposed
               ? run_trial_proposed(cfg, pt_dbm, trial_index, code)
               : run_trial_onoff(cfg, pt_dbm, trial_index, code);
}

TrialRecord run_trial(const SimConfig& cfg, double pt_dbm, int trial_index) {
    const LdpcCode code = LdpcCode::construct_regular(cfg.code_n, cfg.code_rate,
                                                      cfg.code_column_weight, cfg.seed);
    return run_trial(cfg, pt_dbm, trial_index, code);
}

SweepResult run_sweep(const SimConfig& cfg) {
    cfg.validate();
    const LdpcCode code = LdpcCode::construct_regular(cfg.code_n, cfg.code_rate,
                                                      cfg.code_column_weight, cfg.seed);
    const std::size_t n_pt = cfg.pt_grid_dbm.size();
    SweepResult result;
    result.records.assign(n_pt, std::vector<TrialRecord>(cfg.trials));

    const std::size_t total = n_pt * static_cast<std::size_t>(cfg.trials);
    unsigned nthreads = cfg.threads > 0
                            ? static_cast<unsigned>(cfg.threads)
                            : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, total));

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            const std::size_t pt = i / cfg.trials;
            const int tr = static_cast<int>(i % cfg.trials);
            try {
                result.records[pt][tr] = run_trial(cfg, cfg.pt_grid_dbm[pt], tr, code);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    if (nthreads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    result.points.resize(n_pt);
    for (std::size_t p = 0; p < n_pt; ++p) {
        SweepPoint& pt = result.points[p];
        pt.pt_dbm = cfg.pt_grid_dbm[p];
        const auto& recs = result.records[p];
        const double n = static_cast<double>(recs.size());
        double s_nd = 0, s_nc = 0, s_ber = 0, s_it = 0, s_cond = 0;
        for (const auto& r : recs) {
            s_nd += r.nmse_direct;
            s_nc += r.nmse_cascaded;
            s_ber += r.ber;
            s_it += r.iterations_used;
            s_cond += r.lambda_cond;
        }
        pt.nmse_direct_mean = s_nd / n;
        pt.nmse_cascaded_mean = s_nc / n;
        pt.ber_mean = s_ber / n;
        pt.mean_iters = s_it / n;
        pt.mean_cond = s_cond / n;
        double v_nc = 0, v_ber = 0;
        for (const auto& r : recs) {
            v_nc += (r.nmse_cascaded - pt.nmse_cascaded_mean) *
                    (r.nmse_cascaded - pt.nmse_cascaded_mean);
            v_ber += (r.ber - pt.ber_mean) * (r.ber - pt.ber_mean);
        }
        if (recs.size() > 1) {
            pt.nmse_ci = 1.96 * std::sqrt(v_nc / (n - 1.0) / n);
            pt.ber_ci = 1.96 * std::sqrt(v_ber / (n - 1.0) / n);
        }
    }
    return result;
}

namespace {

void append_num(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

} // namespace

void emit_csv(const SweepResult& result, const std::string& path) {
    std::string out =
        "pt_dbm,nmse_direct_mean,nmse_cascaded_mean,ber_mean,nmse_ci,ber_ci,"
        "mean_iters,mean_cond\n";
    for (const auto& p : result.points) {
        append_num(out, p.pt_dbm);
        for (double v : {p.nmse_direct_mean, p.nmse_cascaded_mean, p.ber_mean, p.nmse_ci,
                         p.ber_ci, p.mean_iters, p.mean_cond}) {
            out += ',';
            append_num(out, v);
        }
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    f << out;
    if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

void emit_trace_csv(const SweepResult& result, const std::string& path) {
    std::string out = "pt_dbm,trial,stage,nmse_cascaded\n";
    for (std::size_t p = 0; p < result.records.size(); ++p) {
        for (std::size_t t = 0; t < result.records[p].size(); ++t) {
            const TrialRecord& r = result.records[p][t];
            auto row = [&](int stage, double v) {
                append_num(out, result.points[p].pt_dbm);
                out += ',' + std::to_string(t) + ',' + std::to_string(stage) + ',';
                append_num(out, v);
                out += '\n';
            };
            row(0, r.nmse_coarse);
            for (std::size_t s = 0; s < r.nmse_trace.size(); ++s) {
                row(static_cast<int>(s) + 1, r.nmse_trace[s]);
            }
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_trace_csv: cannot open " + path);
    f << out;
    if (!f) throw std::runtime_error("emit_trace_csv: write failed for " + path);
}

} // namespace rislink
