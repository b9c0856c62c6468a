#include <doctest.h>

#include <cmath>

#include "rislink/channel.hpp"

using namespace rislink;

namespace {

SystemGeometry table_geometry() {
    SystemGeometry g;
    g.ap_position = {0.0, 0.0, 0.0};
    g.ris_positions = {{500.0, 10.0, 0.0}, {500.0, -10.0, 0.0}};
    g.user_center = {500.0, 0.0, 0.0};
    g.user_radius = 5.0;
    g.M = 8;
    g.K = 4;
    g.L = 2;
    g.N = 16;
    return g;
}

SystemGeometry small_geometry(int m = 3, int k = 2, int l = 2, int n = 2) {
    SystemGeometry g = table_geometry();
    g.M = m;
    g.K = k;
    g.L = l;
    g.N = n;
    g.ris_positions.assign(l, Vec3{500.0, 10.0, 0.0});
    for (int j = 0; j < l; ++j) g.ris_positions[j][1] = 10.0 - 20.0 * j;
    return g;
}

} // namespace

TEST_CASE("path loss values") {
    CHECK(path_loss_db(LinkKind::ap_ris, 1.0) == doctest::Approx(37.3));
    CHECK(path_loss_db(LinkKind::ap_ris, 500.0) == doctest::Approx(96.677).epsilon(1e-4));
    CHECK(path_loss_db(LinkKind::ris_user, 500.0) == doctest::Approx(96.677).epsilon(1e-4));
    CHECK(path_loss_db(LinkKind::ap_user, 500.0) == doctest::Approx(113.369).epsilon(1e-4));
    CHECK_THROWS_AS(path_loss_db(LinkKind::ap_user, 0.0), std::domain_error);
    CHECK_THROWS_AS(path_loss_db(LinkKind::ap_ris, -2.0), std::domain_error);
}

TEST_CASE("channel draws") {
    const SystemGeometry g = table_geometry();

    SUBCASE("nlos zeroes the direct matrix, los does not") {
        Rng rng(1);
        const ChannelSet nl = draw_channels(g, Scenario::nlos, 1e-14, 1.0, rng);
        CHECK(linalg::frob_norm_sq(nl.H) == 0.0);
        Rng rng2(1);
        const ChannelSet lo = draw_channels(g, Scenario::los, 1e-14, 1.0, rng2);
        CHECK(linalg::frob_norm_sq(lo.H) > 0.0);
    }
    SUBCASE("same seed reproduces the draw") {
        Rng a(77), b(77);
        const ChannelSet c1 = draw_channels(g, Scenario::los, 1e-14, 1.0, a);
        const ChannelSet c2 = draw_channels(g, Scenario::los, 1e-14, 1.0, b);
        CHECK(linalg::frob_norm_sq(linalg::sub(c1.H, c2.H)) == 0.0);
        CHECK(linalg::frob_norm_sq(linalg::sub(c1.G[1], c2.G[1])) == 0.0);
        CHECK(linalg::frob_norm_sq(linalg::sub(c1.F[0], c2.F[0])) == 0.0);
    }
    SUBCASE("entry variance follows the link gain") {
        Rng rng(5);
        double acc = 0.0;
        long count = 0;
        double gain = 0.0;
        for (int d = 0; d < 800; ++d) {
            const ChannelSet ch = draw_channels(g, Scenario::los, 1e-14, 1.0, rng);
            acc += linalg::frob_norm_sq(ch.G[0]);
            count += static_cast<long>(ch.G[0].rows() * ch.G[0].cols());
            gain = ch.gains.ap_ris[0];
        }
        const double sample_var = acc / static_cast<double>(count);
        CHECK(sample_var == doctest::Approx(gain).epsilon(0.02));
    }
    SUBCASE("direct extra loss scales the los gain") {
        Rng a(4), b(4);
        const ChannelSet base = draw_channels(g, Scenario::los, 1e-14, 1.0, a, 0.0);
        const ChannelSet weak = draw_channels(g, Scenario::los, 1e-14, 1.0, b, 10.0);
        CHECK(weak.gains.direct[0] == doctest::Approx(base.gains.direct[0] / 10.0));
    }
    SUBCASE("geometry validation") {
        SystemGeometry bad = g;
        bad.M = 0;
        Rng rng(1);
        CHECK_THROWS(draw_channels(bad, Scenario::los, 1e-14, 1.0, rng));
        SystemGeometry bad2 = g;
        bad2.ris_positions.pop_back();
        CHECK_THROWS(draw_channels(bad2, Scenario::los, 1e-14, 1.0, rng));
    }
}

TEST_CASE("cascaded matrices") {
    SUBCASE("scalar case") {
        Rng rng(2);
        const ChannelSet ch = draw_channels(small_geometry(1, 1, 1, 1), Scenario::los,
                                            1e-14, 1.0, rng);
        const CascadedMatrices cm = cascaded_matrices(ch);
        CHECK(std::abs(cm.Z[0](0, 0) - ch.G[0](0, 0) * ch.F[0](0, 0)) < 1e-18);
        CHECK(std::abs(cm.Z_all(0, 0) - cm.Z[0](0, 0)) == 0.0);
    }
    SUBCASE("zero user column gives zero block") {
        Rng rng(3);
        ChannelSet ch = draw_channels(small_geometry(), Scenario::los, 1e-14, 1.0, rng);
        for (int j = 0; j < ch.L(); ++j) {
            for (int r = 0; r < ch.N(); ++r) ch.F[j](r, 1) = cd{};
        }
        const CascadedMatrices cm = cascaded_matrices(ch);
        CHECK(linalg::frob_norm_sq(cm.Z[1]) == 0.0);
    }
    SUBCASE("grouped-form identity") {
        Rng rng(17);
        const ChannelSet ch = draw_channels(small_geometry(4, 3, 2, 3), Scenario::los,
                                            1e-14, 1.0, rng);
        const CascadedMatrices cm = cascaded_matrices(ch);
        const int ln = ch.L() * ch.N();
        CVec phi(ln);
        for (auto& p : phi) p = rng.cgauss();
        CVec x(ch.K());
        for (auto& v : x) v = rng.cgauss();
        // sum_k Z_k phi x_k
        CVec lhs(ch.M());
        for (int k = 0; k < ch.K(); ++k) {
            const CVec zp = linalg::matvec(cm.Z[k], phi);
            for (int r = 0; r < ch.M(); ++r) lhs[r] += zp[r] * x[k];
        }
        // G_p diag(phi) F_p x
        const CMat gp = ch.stacked_g();
        const CMat fp = ch.stacked_f();
        CVec fx = linalg::matvec(fp, x);
        for (int i = 0; i < ln; ++i) fx[i] *= phi[i];
        const CVec rhs = linalg::matvec(gp, fx);
        double num = 0, den = 0;
        for (int r = 0; r < ch.M(); ++r) {
            num += std::norm(lhs[r] - rhs[r]);
            den += std::norm(rhs[r]);
        }
        CHECK(num / den < 1e-20);
    }
}

TEST_CASE("equivalent channel") {
    Rng rng(23);
    const ChannelSet ch = draw_channels(small_geometry(3, 2, 2, 2), Scenario::los,
                                        1e-14, 1.0, rng);
    SUBCASE("nulled reflection returns the direct matrix") {
        const CMat hb = equivalent_channel(ch, CVec(4, cd{}));
        CHECK(linalg::frob_norm_sq(linalg::sub(hb, ch.H)) == 0.0);
    }
    SUBCASE("scalar arithmetic") {
        ChannelSet s;
        s.H = CMat(1, 1);
        s.H(0, 0) = cd{1.0, 0.0};
        s.G.push_back(CMat(1, 1));
        s.G[0](0, 0) = cd{2.0, 0.0};
        s.F.push_back(CMat(1, 1));
        s.F[0](0, 0) = cd{3.0, 0.0};
        s.sigma_n2 = 0.0;
        s.sigma_x2 = 1.0;
        const CMat hb = equivalent_channel(s, CVec{cd{0.0, 1.0}});
        CHECK(hb(0, 0).real() == doctest::Approx(1.0));
        CHECK(hb(0, 0).imag() == doctest::Approx(6.0));
    }
    SUBCASE("matches the per-surface sum") {
        CVec phi(4);
        Rng r2(31);
        for (auto& p : phi) p = r2.cgauss();
        const CMat hb = equivalent_channel(ch, phi);
        // explicit two-surface grouping
        CMat ref = ch.H;
        for (int j = 0; j < 2; ++j) {
            CMat gphi = ch.G[j];
            for (int c = 0; c < 2; ++c) {
                for (int r = 0; r < 3; ++r) gphi(r, c) *= phi[j * 2 + c];
            }
            ref = linalg::add(ref, linalg::mul(gphi, ch.F[j]));
        }
        CHECK(linalg::frob_norm_sq(linalg::sub(hb, ref)) /
                  linalg::frob_norm_sq(ref) < 1e-24);
    }
    SUBCASE("dimension mismatch throws") {
        CHECK_THROWS(equivalent_channel(ch, CVec(3)));
    }
}

TEST_CASE("received-signal synthesis") {
    Rng rng(41);
    ChannelSet ch = draw_channels(small_geometry(3, 2, 1, 2), Scenario::los, 0.0, 1.0, rng);

    SUBCASE("noiseless unit input picks out a column") {
        CMat phi(2, 1);  // zero reflection
        CMat x(2, 1);
        x(0, 0) = cd{1.0, 0.0};
        Rng r(1);
        const CMat y = synthesize_rx(ch, phi, x, r);
        for (int m = 0; m < 3; ++m) CHECK(std::abs(y(m, 0) - ch.H(m, 0)) < 1e-15);
    }
    SUBCASE("noise moments") {
        ch.sigma_n2 = 0.3;
        CMat phi(2, 2000);  // zero reflection columns
        CMat x(2, 2000);    // zero symbols: y is pure noise
        Rng r(9);
        const CMat y = synthesize_rx(ch, phi, x, r);
        const double var = linalg::frob_norm_sq(y) / (3.0 * 2000.0);
        CHECK(var == doctest::Approx(0.3).epsilon(0.02));
    }
    SUBCASE("deterministic under the stream") {
        ch.sigma_n2 = 1e-2;
        CMat phi(2, 4), x(2, 4);
        for (std::size_t i = 0; i < 8; ++i) {
            phi.data()[i] = cd{1.0, 0.0};
            x.data()[i] = cd{0.5, -0.5};
        }
        Rng a(3), b(3);
        const CMat y1 = synthesize_rx(ch, phi, x, a);
        const CMat y2 = synthesize_rx(ch, phi, x, b);
        CHECK(linalg::frob_norm_sq(linalg::sub(y1, y2)) == 0.0);
    }
    SUBCASE("length mismatch throws") {
        CMat phi(2, 3), x(2, 4);
        Rng r(1);
        CHECK_THROWS(synthesize_rx(ch, phi, x, r));
    }
}

TEST_CASE("three expressions of the noiseless received signal agree") {
    Rng rng(55);
    const ChannelSet ch = draw_channels(small_geometry(4, 3, 2, 3), Scenario::los,
                                        0.0, 1.0, rng);
    const CascadedMatrices cm = cascaded_matrices(ch);
    const int ln = ch.L() * ch.N();
    for (int trial = 0; trial < 10; ++trial) {
        CVec phi(ln);
        for (auto& p : phi) p = rng.cgauss();
        CVec x(ch.K());
        for (auto& v : x) v = rng.cgauss();

        // per-surface sum
        CVec y1 = linalg::matvec(ch.H, x);
        for (int j = 0; j < ch.L(); ++j) {
            CVec fx = linalg::matvec(ch.F[j], x);
            for (int i = 0; i < ch.N(); ++i) fx[i] *= phi[j * ch.N() + i];
            const CVec gy = linalg::matvec(ch.G[j], fx);
            for (int r = 0; r < ch.M(); ++r) y1[r] += gy[r];
        }
        // equivalent-channel form
        const CVec y2 = linalg::matvec(equivalent_channel(ch, phi), x);
        // cascaded form
        CVec y3 = linalg::matvec(ch.H, x);
        for (int k = 0; k < ch.K(); ++k) {
            const CVec zp = linalg::matvec(cm.Z[k], phi);
            for (int r = 0; r < ch.M(); ++r) y3[r] += zp[r] * x[k];
        }
        double den = linalg::frob_norm_sq(y1);
        double d12 = 0, d13 = 0;
        for (int r = 0; r < ch.M(); ++r) {
            d12 += std::norm(y1[r] - y2[r]);
            d13 += std::norm(y1[r] - y3[r]);
        }
        CHECK(std::sqrt(d12 / den) < 1e-10);
        CHECK(std::sqrt(d13 / den) < 1e-10);
    }
}
