#include "rislink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rislink/kernels.hpp"

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

namespace rislink {

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double path_loss_db(LinkKind kind, double distance_m) {
    if (!(distance_m > 0.0)) {
        throw std::domain_error("path_loss_db: distance must be positive");
    }
    switch (kind) {
        case LinkKind::ap_ris:
        case LinkKind::ris_user:
            return 37.3 + 22.0 * std::log10(distance_m);
        case LinkKind::ap_user:
            return 32.4 + 30.0 * std::log10(distance_m);
    }
    throw std::invalid_argument("path_loss_db: unknown link kind");
}

void SystemGeometry::validate() const {
    if (M < 1 || K < 1 || L < 1 || N < 1) {
        throw std::invalid_argument("geometry: M, K, L, N must all be >= 1");
    }
    if (!(user_radius >= 0.0)) {
        throw std::invalid_argument("geometry: user_radius must be >= 0");
    }
    if (static_cast<int>(ris_positions.size()) != L) {
        throw std::invalid_argument("geometry: ris_positions size != L");
    }
    auto finite3 = [](const Vec3& p) {
        return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
    };
    if (!finite3(ap_position) || !finite3(user_center)) {
        throw std::invalid_argument("geometry: non-finite position");
    }
    for (const auto& p : ris_positions) {
        if (!finite3(p)) throw std::invalid_argument("geometry: non-finite RIS position");
    }
}

CMat ChannelSet::stacked_g() const {
    const int m = M(), l = L(), n = N();
    CMat gp(m, static_cast<std::size_t>(l) * n);
    for (int j = 0; j < l; ++j) {
        for (int c = 0; c < n; ++c) {
            for (int r = 0; r < m; ++r) gp(r, static_cast<std::size_t>(j) * n + c) = G[j](r, c);
        }
    }
    return gp;
}

CMat ChannelSet::stacked_f() const {
    const int k = K(), l = L(), n = N();
    CMat fp(static_cast<std::size_t>(l) * n, k);
    for (int j = 0; j < l; ++j) {
        for (int c = 0; c < k; ++c) {
            for (int r = 0; r < n; ++r) fp(static_cast<std::size_t>(j) * n + r, c) = F[j](r, c);
        }
    }
    return fp;
}

ChannelSet draw_channels(const SystemGeometry& geom, Scenario scenario,
                         double sigma_n2, double sigma_x2, Rng& rng,
                         double direct_extra_loss_db) {
    geom.validate();
    if (!(sigma_n2 >= 0.0)) throw std::invalid_argument("draw_channels: sigma_n2 < 0");
    if (!(sigma_x2 > 0.0)) throw std::invalid_argument("draw_channels: sigma_x2 <= 0");

    ChannelSet ch;
    ch.sigma_n2 = sigma_n2;
    ch.sigma_x2 = sigma_x2;

    // user positions uniform in a horizontal disc
    ch.user_positions.resize(geom.K);
    for (int k = 0; k < geom.K; ++k) {
        const double r = geom.user_radius * std::sqrt(rng.uniform());
        const double a = kTwoPi * rng.uniform();
        ch.user_positions[k] = {geom.user_center[0] + r * std::cos(a),
                                geom.user_center[1] + r * std::sin(a),
                                geom.user_center[2]};
    }

    ch.gains.direct.resize(geom.K);
    ch.gains.ap_ris.resize(geom.L);
    ch.gains.ris_user.assign(geom.L, std::vector<double>(geom.K));
    for (int k = 0; k < geom.K; ++k) {
        const double pl = path_loss_db(LinkKind::ap_user,
                                       distance(geom.ap_position, ch.user_positions[k]));
        ch.gains.direct[k] = (scenario == Scenario::nlos)
                                 ? 0.0
                                 : db_to_linear(-(pl + direct_extra_loss_db));
    }
    for (int j = 0; j < geom.L; ++j) {
        ch.gains.ap_ris[j] = db_to_linear(
            -path_loss_db(LinkKind::ap_ris, distance(geom.ap_position, geom.ris_positions[j])));
        for (int k = 0; k < geom.K; ++k) {
            ch.gains.ris_user[j][k] = db_to_linear(-path_loss_db(
                LinkKind::ris_user, distance(geom.ris_positions[j], ch.user_positions[k])));
        }
    }

    ch.H = CMat(geom.M, geom.K);
    if (scenario == Scenario::los) {
        for (int k = 0; k < geom.K; ++k) {
            const double s = std::sqrt(ch.gains.direct[k]);
            for (int m = 0; m < geom.M; ++m) ch.H(m, k) = s * rng.cgauss();
        }
    }
    ch.G.reserve(geom.L);
    ch.F.reserve(geom.L);
    for (int j = 0; j < geom.L; ++j) {
        CMat g(geom.M, geom.N);
        const double sg = std::sqrt(ch.gains.ap_ris[j]);
        for (std::size_t i = 0, e = g.rows() * g.cols(); i < e; ++i) {
            g.data()[i] = sg * rng.cgauss();
        }
        ch.G.push_back(std::move(g));
        CMat f(geom.N, geom.K);
        for (int k = 0; k < geom.K; ++k) {
            const double sf = std::sqrt(ch.gains.ris_user[j][k]);
            for (int r = 0; r < geom.N; ++r) f(r, k) = sf * rng.cgauss();
        }
        ch.F.push_back(std::move(f));
    }
    return ch;
}

CascadedMatrices cascaded_matrices(const ChannelSet& ch) {
    const int m = ch.M(), k = ch.K(), ln = ch.L() * ch.N();
    const CMat gp = ch.stacked_g();
    const CMat fp = ch.stacked_f();
    CascadedMatrices cm;
    cm.Z.reserve(k);
    cm.Z_all = CMat(m, static_cast<std::size_t>(k) * ln);
    for (int u = 0; u < k; ++u) {
        CMat zk(m, ln);
        for (int c = 0; c < ln; ++c) {
            const cd f = fp(c, u);
            for (int r = 0; r < m; ++r) zk(r, c) = gp(r, c) * f;
        }
        for (int c = 0; c < ln; ++c) {
            for (int r = 0; r < m; ++r) {
                cm.Z_all(r, static_cast<std::size_t>(u) * ln + c) = zk(r, c);
            }
        }
        cm.Z.push_back(std::move(zk));
    }
    return cm;
}

CMat equivalent_channel(const ChannelSet& ch, const CVec& phi) {
    const int ln = ch.L() * ch.N();
    if (static_cast<int>(phi.size()) != ln) {
        throw std::invalid_argument("equivalent_channel: phi length != L*N");
    }
    const CMat gp = ch.stacked_g();
    const CMat fp = ch.stacked_f();
    // H + G_p diag(phi) F_p
    CMat gphi = gp;
    for (int c = 0; c < ln; ++c) {
        cd* col = gphi.col(c);
        for (int r = 0; r < ch.M(); ++r) col[r] *= phi[c];
    }
    return linalg::add(ch.H, linalg::mul(gphi, fp));
}

CMat synthesize_rx(const ChannelSet& ch, const CMat& phi_schedule,
                   const CMat& symbols, Rng& rng) {
    const std::size_t T = phi_schedule.cols();
    if (symbols.cols() != T) {
        throw std::invalid_argument("synthesize_rx: schedule/symbol length mismatch");
    }
    if (T == 0) throw std::invalid_argument("synthesize_rx: empty block");
    if (static_cast<int>(symbols.rows()) != ch.K()) {
        throw std::invalid_argument("synthesize_rx: symbol rows != K");
    }
    const int m = ch.M();
    const CMat gp = ch.stacked_g();
    const CMat fp = ch.stacked_f();
    const std::size_t ln = gp.cols();
    if (phi_schedule.rows() != ln) {
        throw std::invalid_argument("synthesize_rx: phi rows != L*N");
    }
    const double noise_amp = std::sqrt(ch.sigma_n2);
    CMat y(m, T);
    CVec fx(ln), scaled(ln);
    for (std::size_t t = 0; t < T; ++t) {
        CVec x = symbols.get_col(t);
        // direct part
        CVec yt = linalg::matvec(ch.H, x);
        // reflected part: G_p (phi .* (F_p x))
        std::fill(fx.begin(), fx.end(), cd{});
        for (int c = 0; c < ch.K(); ++c) {
            kernels::axpy(x[c], fp.col(c), fx.data(), ln);
        }
        const cd* phi = phi_schedule.col(t);
        for (std::size_t i = 0; i < ln; ++i) scaled[i] = phi[i] * fx[i];
        for (std::size_t i = 0; i < ln; ++i) {
            kernels::axpy(scaled[i], gp.col(i), yt.data(), m);
        }
        for (int r = 0; r < m; ++r) yt[r] += noise_amp * rng.cgauss();
        y.set_col(t, yt);
    }
    return y;
}

} // namespace rislink
