#include "rislink/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "rislink/rng.hpp"

namespace rislink {

PacketLayout make_packet_layout(int n_bits, double rate, int n_pilot_sym, int bits_per_sym) {
    if (n_bits <= 0 || bits_per_sym <= 0) {
        throw std::invalid_argument("packet layout: non-positive sizes");
    }
    const double kf = n_bits * rate;
    const int k = static_cast<int>(std::lround(kf));
    if (std::abs(kf - k) > 1e-9 || k <= 0 || k >= n_bits) {
        throw std::invalid_argument("packet layout: n*rate not integral");
    }
    if (n_bits % bits_per_sym != 0 || k % bits_per_sym != 0) {
        throw std::invalid_argument("packet layout: bit counts not divisible by symbol size");
    }
    const int total = n_bits / bits_per_sym;
    const int systematic = k / bits_per_sym;
    if (n_pilot_sym < 0 || n_pilot_sym * bits_per_sym > k) {
        throw std::invalid_argument("packet layout: pilot budget exceeds systematic capacity");
    }
    PacketLayout lay;
    lay.n_pilot_sym = n_pilot_sym;
    lay.n_info_sym = systematic - n_pilot_sym;
    lay.n_parity_sym = total - systematic;
    lay.pilot_idx.resize(lay.n_pilot_sym);
    lay.info_idx.resize(lay.n_info_sym);
    lay.parity_idx.resize(lay.n_parity_sym);
    for (int i = 0; i < lay.n_pilot_sym; ++i) lay.pilot_idx[i] = i;
    for (int i = 0; i < lay.n_info_sym; ++i) lay.info_idx[i] = n_pilot_sym + i;
    for (int i = 0; i < lay.n_parity_sym; ++i) lay.parity_idx[i] = systematic + i;
    return lay;
}

namespace {

// dense GF(2) rows in 64-bit words
struct BitMatrix {
    int rows = 0;
    int cols = 0;
    std::size_t words = 0;
    std::vector<std::uint64_t> d;

    BitMatrix(int r, int c)
        : rows(r), cols(c), words((static_cast<std::size_t>(c) + 63) / 64),
          d(static_cast<std::size_t>(r) * words, 0) {}

    std::uint64_t* row(int r) { return d.data() + static_cast<std::size_t>(r) * words; }
    const std::uint64_t* row(int r) const { return d.data() + static_cast<std::size_t>(r) * words; }

    bool get(int r, int c) const { return (row(r)[c >> 6] >> (c & 63)) & 1u; }
    void set(int r, int c) { row(r)[c >> 6] |= (std::uint64_t{1} << (c & 63)); }

    void xor_rows(int dst, int src) {
        auto* a = row(dst);
        const auto* b = row(src);
        for (std::size_t w = 0; w < words; ++w) a[w] ^= b[w];
    }
};

} // namespace

void LdpcCode::build_edges() {
    int e = 0;
    check_edge_start_.assign(m_ + 1, 0);
    edge_var_.clear();
    var_edges_.assign(n_, {});
    for (int c = 0; c < m_; ++c) {
        check_edge_start_[c] = e;
        for (int v : check_nb_[c]) {
            edge_var_.push_back(v);
            var_edges_[v].push_back(e);
            ++e;
        }
    }
    check_edge_start_[m_] = e;
}

void LdpcCode::build_encoder() {
    const int k = n_ - m_;
    // row-reduce [B | A] with pivots restricted to the parity block B; a row
    // left without a pivot must be zero across A as well or no systematic
    // parity assignment exists for every message
    BitMatrix aug(m_, m_ + k);
    for (int c = 0; c < m_; ++c) {
        for (int v : check_nb_[c]) {
            if (v >= k) aug.set(c, v - k);
            else aug.set(c, m_ + v);
        }
    }
    int pr = 0;
    std::vector<std::pair<int, int>> pivots;  // (row, parity column)
    pivots.reserve(m_);
    for (int col = 0; col < m_ && pr < m_; ++col) {
        int sel = -1;
        for (int r = pr; r < m_; ++r) {
            if (aug.get(r, col)) { sel = r; break; }
        }
        if (sel < 0) continue;
        if (sel != pr) {
            for (std::size_t w = 0; w < aug.words; ++w) {
                std::swap(aug.row(pr)[w], aug.row(sel)[w]);
            }
        }
        for (int r = 0; r < m_; ++r) {
            if (r != pr && aug.get(r, col)) aug.xor_rows(r, pr);
        }
        pivots.emplace_back(pr, col);
        ++pr;
    }
    for (int r = pr; r < m_; ++r) {
        for (int v = 0; v < k; ++v) {
            if (aug.get(r, m_ + v)) {
                throw std::runtime_error("ldpc: rank-deficient systematic transform");
            }
        }
    }
    // free parity bits stay zero; pivot parity bit `col` of message bit v is
    // the reduced A entry in the pivot row
    parity_words_ = (static_cast<std::size_t>(m_) + 63) / 64;
    encode_masks_.assign(static_cast<std::size_t>(k) * parity_words_, 0);
    for (int v = 0; v < k; ++v) {
        auto* mask = encode_masks_.data() + static_cast<std::size_t>(v) * parity_words_;
        for (const auto& [row, col] : pivots) {
            if (aug.get(row, m_ + v)) {
                mask[col >> 6] ^= (std::uint64_t{1} << (col & 63));
            }
        }
    }
}

LdpcCode LdpcCode::construct_regular(int n, double rate, int column_weight,
                                     std::uint64_t seed) {
    if (n <= 0) throw std::invalid_argument("ldpc: n must be positive");
    const double mf = n * (1.0 - rate);
    const int m = static_cast<int>(std::lround(mf));
    if (std::abs(mf - m) > 1e-9 || m <= 0 || m >= n) {
        throw std::invalid_argument("ldpc: n*(1-rate) not integral");
    }
    if (column_weight < 2 || column_weight > m) {
        throw std::invalid_argument("ldpc: infeasible column weight");
    }

    for (int attempt = 0; attempt < 32; ++attempt) {
        Rng rng = Rng::derive(seed, 0xC0DEu, static_cast<std::uint64_t>(attempt));
        std::vector<std::vector<int>> check_nb(m);
        std::vector<std::vector<int>> var_nb(n);
        std::vector<int> check_deg(m, 0);

        // progressive edge growth: each new edge goes to a check that is
        // currently unreachable from the variable's subtree (or as deep as
        // possible), minimum degree first, random tie-break
        std::vector<int> dist(m);
        std::vector<int> frontier_v, next_v;
        std::vector<char> seen_v(n), seen_c(m);
        for (int v = 0; v < n; ++v) {
            for (int e = 0; e < column_weight; ++e) {
                std::vector<int> candidates;
                if (e == 0) {
                    candidates.resize(m);
                    for (int c = 0; c < m; ++c) candidates[c] = c;
                } else {
                    std::fill(seen_v.begin(), seen_v.end(), 0);
                    std::fill(seen_c.begin(), seen_c.end(), 0);
                    frontier_v.assign(1, v);
                    seen_v[v] = 1;
                    int covered = 0;
                    std::vector<int> last_level;
                    while (covered < m && !frontier_v.empty()) {
                        std::vector<int> level_checks;
                        for (int fv : frontier_v) {
                            for (int c : var_nb[fv]) {
                                if (!seen_c[c]) {
                                    seen_c[c] = 1;
                                    ++covered;
                                    level_checks.push_back(c);
                                }
                            }
                        }
                        if (level_checks.empty()) break;
                        last_level = std::move(level_checks);
                        next_v.clear();
                        for (int c : last_level) {
                            for (int nv : check_nb[c]) {
                                if (!seen_v[nv]) {
                                    seen_v[nv] = 1;
                                    next_v.push_back(nv);
                                }
                            }
                        }
                        frontier_v = next_v;
                    }
                    if (covered < m) {
                        candidates.reserve(m - covered);
                        for (int c = 0; c < m; ++c) {
                            if (!seen_c[c]) candidates.push_back(c);
                        }
                    } else {
                        candidates = last_level;  // deepest reachable checks
                    }
                }
                int best_deg = n * column_weight + 1;
                std::vector<int> ties;
                for (int c : candidates) {
                    if (check_deg[c] < best_deg) {
                        best_deg = check_deg[c];
                        ties.assign(1, c);
                    } else if (check_deg[c] == best_deg) {
                        ties.push_back(c);
                    }
                }
                const int pick = ties[static_cast<std::size_t>(
                    rng.uniform() * static_cast<double>(ties.size()))];
                var_nb[v].push_back(pick);
                check_nb[pick].push_back(v);
                ++check_deg[pick];
            }
        }

        // choose the parity positions: eliminate with pivots preferred at
        // high column indices, then move a column basis into the tail (plus
        // high-index fillers when the matrix is rank deficient, which keeps
        // B p = A m solvable for every message)
        BitMatrix h(m, n);
        for (int c = 0; c < m; ++c) {
            for (int v : check_nb[c]) h.set(c, v);
        }
        std::vector<char> in_tail(n, 0);
        int rank = 0;
        int next_row = 0;
        for (int col = n - 1; col >= 0 && rank < m; --col) {
            int sel = -1;
            for (int r = next_row; r < m; ++r) {
                if (h.get(r, col)) { sel = r; break; }
            }
            if (sel < 0) continue;
            if (sel != next_row) {
                for (std::size_t w = 0; w < h.words; ++w) {
                    std::swap(h.row(next_row)[w], h.row(sel)[w]);
                }
            }
            for (int r = 0; r < m; ++r) {
                if (r != next_row && h.get(r, col)) h.xor_rows(r, next_row);
            }
            in_tail[col] = 1;
            ++rank;
            ++next_row;
        }
        for (int col = n - 1; rank < m && col >= 0; --col) {
            if (!in_tail[col]) {
                in_tail[col] = 1;
                ++rank;
            }
        }

        std::vector<int> new_pos(n);
        int sys = 0, par = n - m;
        for (int v = 0; v < n; ++v) {
            new_pos[v] = in_tail[v] ? par++ : sys++;
        }

        LdpcCode code;
        code.n_ = n;
        code.m_ = m;
        code.column_weight_ = column_weight;
        code.check_nb_.assign(m, {});
        code.var_nb_.assign(n, {});
        for (int c = 0; c < m; ++c) {
            for (int v : check_nb[c]) code.check_nb_[c].push_back(new_pos[v]);
            std::sort(code.check_nb_[c].begin(), code.check_nb_[c].end());
        }
        for (int c = 0; c < m; ++c) {
            for (int v : code.check_nb_[c]) code.var_nb_[v].push_back(c);
        }
        code.build_edges();
        code.build_encoder();
        return code;
    }
    throw std::runtime_error("ldpc: failed to draw a full-rank regular matrix");
}

std::vector<std::uint8_t> LdpcCode::encode(const std::vector<std::uint8_t>& message) const {
    const int k = n_ - m_;
    if (static_cast<int>(message.size()) != k) {
        throw std::invalid_argument("ldpc encode: message length != k");
    }
    std::vector<std::uint64_t> parity(parity_words_, 0);
    for (int v = 0; v < k; ++v) {
        if (message[v] & 1u) {
            const auto* mask = encode_masks_.data() + static_cast<std::size_t>(v) * parity_words_;
            for (std::size_t w = 0; w < parity_words_; ++w) parity[w] ^= mask[w];
        }
    }
    std::vector<std::uint8_t> cw(n_);
    std::copy(message.begin(), message.end(), cw.begin());
    for (int p = 0; p < m_; ++p) {
        cw[k + p] = static_cast<std::uint8_t>((parity[p >> 6] >> (p & 63)) & 1u);
    }
    return cw;
}

bool LdpcCode::syndrome_ok(const std::vector<std::uint8_t>& word) const {
    if (static_cast<int>(word.size()) != n_) {
        throw std::invalid_argument("ldpc syndrome: word length != n");
    }
    for (int c = 0; c < m_; ++c) {
        unsigned s = 0;
        for (int v : check_nb_[c]) s ^= word[v];
        if (s & 1u) return false;
    }
    return true;
}

LdpcCode::DecodeResult LdpcCode::bp_decode(const std::vector<double>& channel_llr,
                                           int max_iters) const {
    if (static_cast<int>(channel_llr.size()) != n_) {
        throw std::invalid_argument("ldpc decode: llr length != n");
    }
    if (max_iters < 1) throw std::invalid_argument("ldpc decode: max_iters < 1");

    const std::size_t n_edges = edge_var_.size();
    std::vector<double> lin(n_);
    for (int v = 0; v < n_; ++v) lin[v] = clamp_llr(channel_llr[v]);

    std::vector<double> v2c(n_edges), c2v(n_edges, 0.0);
    for (std::size_t e = 0; e < n_edges; ++e) v2c[e] = lin[edge_var_[e]];

    DecodeResult res;
    res.posterior.assign(n_, 0.0);
    res.hard.assign(n_, 0);

    std::vector<double> fwd, bwd;
    constexpr double kTanhLim = 1.0 - 1e-15;
    for (int iter = 1; iter <= max_iters; ++iter) {
        // check-node pass: forward/backward partial products of tanh(L/2)
        for (int c = 0; c < m_; ++c) {
            const int e0 = check_edge_start_[c];
            const int deg = check_edge_start_[c + 1] - e0;
            fwd.resize(deg);
            bwd.resize(deg);
            for (int i = 0; i < deg; ++i) {
                const double t = std::tanh(0.5 * v2c[e0 + i]);
                fwd[i] = (i == 0) ? t : fwd[i - 1] * t;
            }
            for (int i = deg - 1; i >= 0; --i) {
                const double t = std::tanh(0.5 * v2c[e0 + i]);
                bwd[i] = (i == deg - 1) ? t : bwd[i + 1] * t;
            }
            for (int i = 0; i < deg; ++i) {
                double prod = 1.0;
                if (i > 0) prod *= fwd[i - 1];
                if (i + 1 < deg) prod *= bwd[i + 1];
                prod = std::clamp(prod, -kTanhLim, kTanhLim);
                c2v[e0 + i] = clamp_llr(2.0 * std::atanh(prod));
            }
        }
        // variable-node pass
        for (int v = 0; v < n_; ++v) {
            double sum = lin[v];
            for (int e : var_edges_[v]) sum += c2v[e];
            res.posterior[v] = sum;
            res.hard[v] = static_cast<std::uint8_t>(sum < 0.0);
            for (int e : var_edges_[v]) v2c[e] = clamp_llr(sum - c2v[e]);
        }
        res.iterations = iter;
        if (syndrome_ok(res.hard)) {
            res.converged = true;
            break;
        }
    }
    res.extrinsic.resize(n_);
    for (int v = 0; v < n_; ++v) res.extrinsic[v] = res.posterior[v] - lin[v];
    return res;
}

void LdpcCode::write_alist(std::ostream& os) const {
    std::size_t max_col = 0, max_row = 0;
    for (const auto& nb : var_nb_) max_col = std::max(max_col, nb.size());
    for (const auto& nb : check_nb_) max_row = std::max(max_row, nb.size());
    os << n_ << ' ' << m_ << '\n' << max_col << ' ' << max_row << '\n';
    for (int v = 0; v < n_; ++v) os << var_nb_[v].size() << (v + 1 < n_ ? ' ' : '\n');
    for (int c = 0; c < m_; ++c) os << check_nb_[c].size() << (c + 1 < m_ ? ' ' : '\n');
    for (int v = 0; v < n_; ++v) {
        for (std::size_t i = 0; i < max_col; ++i) {
            os << (i < var_nb_[v].size() ? var_nb_[v][i] + 1 : 0)
               << (i + 1 < max_col ? ' ' : '\n');
        }
    }
    for (int c = 0; c < m_; ++c) {
        for (std::size_t i = 0; i < max_row; ++i) {
            os << (i < check_nb_[c].size() ? check_nb_[c][i] + 1 : 0)
               << (i + 1 < max_row ? ' ' : '\n');
        }
    }
}

LdpcCode LdpcCode::read_alist(std::istream& is) {
    int n = 0, m = 0;
    std::size_t max_col = 0, max_row = 0;
    if (!(is >> n >> m >> max_col >> max_row) || n <= 0 || m <= 0) {
        throw std::runtime_error("alist: bad header");
    }
    std::vector<int> col_deg(n), row_deg(m);
    for (auto& d : col_deg) is >> d;
    for (auto& d : row_deg) is >> d;
    LdpcCode code;
    code.n_ = n;
    code.m_ = m;
    code.var_nb_.assign(n, {});
    code.check_nb_.assign(m, {});
    for (int v = 0; v < n; ++v) {
        for (std::size_t i = 0; i < max_col; ++i) {
            int c = 0;
            if (!(is >> c)) throw std::runtime_error("alist: truncated column list");
            if (c > 0) code.var_nb_[v].push_back(c - 1);
        }
        if (static_cast<int>(code.var_nb_[v].size()) != col_deg[v]) {
            throw std::runtime_error("alist: column degree mismatch");
        }
    }
    for (int c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < max_row; ++i) {
            int v = 0;
            if (!(is >> v)) throw std::runtime_error("alist: truncated row list");
            if (v > 0) code.check_nb_[c].push_back(v - 1);
        }
        if (static_cast<int>(code.check_nb_[c].size()) != row_deg[c]) {
            throw std::runtime_error("alist: row degree mismatch");
        }
    }
    std::size_t wmin = SIZE_MAX, wmax = 0;
    for (const auto& nb : code.var_nb_) {
        wmin = std::min(wmin, nb.size());
        wmax = std::max(wmax, nb.size());
    }
    code.column_weight_ = (wmin == wmax) ? static_cast<int>(wmin) : 0;
    code.build_edges();
    code.build_encoder();
    return code;
}

} // namespace rislink
