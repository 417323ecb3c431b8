#include "support.hpp"

#include <cip/model.hpp>
#include <cip/power.hpp>

#include <doctest.h>

using namespace cip;
using cip_test::TestRng;
using cip_test::penalty_oracle;

namespace {

CVector alignment_targets(const SymbolVector& d, const RVector& zeta, double sigma2) {
    CVector y(d.size());
    for (size_t j = 0; j < d.size(); ++j) y(j) = std::sqrt(sigma2 * zeta(j)) * d[j].value;
    return y;
}

RVector random_zeta(TestRng& rng, int K) {
    RVector z(K);
    for (int j = 0; j < K; ++j) z(j) = rng.uniform(0.5, 20.0);
    return z;
}

}  // namespace

TEST_CASE("cipm meets every alignment equality exactly") {
    TestRng rng(51);
    for (int t = 0; t < 2000; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K, 6);
        const double s2 = rng.uniform(0.2, 2.0);
        const auto H = generate_channel(K, M, 1.0, 900 + t, s2);
        const auto d = random_symbols(K, t % 2 ? 4 : 8, t);
        const RVector z = random_zeta(rng, K);
        const auto s = cipm_solve(H, d, z);
        const CVector y = alignment_targets(d, z, s2);
        for (int j = 0; j < K; ++j) {
            CHECK(std::abs(s.per_user_rx(j).real() - y(j).real()) <= 1e-8);
            CHECK(std::abs(s.per_user_rx(j).imag() - y(j).imag()) <= 1e-8);
        }
        CHECK(s.power == doctest::Approx(s.x.x.squaredNorm()).epsilon(1e-14));
    }
}

TEST_CASE("cipm closed forms") {
    TestRng rng(52);
    for (int t = 0; t < 100; ++t) {
        const int M = rng.integer(1, 5);
        const ChannelMatrix H(rng.cmatrix(1, M), 0.7);
        const auto d = random_symbols(1, 8, t);
        const RVector z = RVector::Constant(1, rng.uniform(0.5, 10.0));
        const auto s = cipm_solve(H, d, z);
        const CVector want = std::sqrt(0.7 * z(0)) * d[0].value * H.H().row(0).adjoint() / H.H().row(0).squaredNorm();
        CHECK((s.x.x - want).norm() <= 1e-12 * want.norm());
    }
    // orthogonal rows decouple: power is the sum of single-user powers
    Eigen::HouseholderQR<CMatrix> qr(rng.cmatrix(4, 4));
    CMatrix h = CMatrix(qr.householderQ()).topRows(3);
    h.row(0) *= 3.0;
    h.row(1) *= 0.4;
    const ChannelMatrix H(h, 1.3);
    const RVector z = random_zeta(rng, 3);
    double want = 0.0;
    for (int j = 0; j < 3; ++j) want += 1.3 * z(j) / h.row(j).squaredNorm();
    CHECK(cipm_solve(H, random_symbols(3, 4, 2), z).power == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("cipm agrees with a penalty-method minimizer") {
    TestRng rng(53);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int K = rng.integer(1, 3), M = rng.integer(K, 4);
        const auto H = generate_channel(K, M, 1.0, 4000 + t);
        const auto d = random_symbols(K, 4, t);
        const RVector z = random_zeta(rng, K);
        const auto s = cipm_solve(H, d, z);
        const CVector xo = penalty_oracle(H.H(), alignment_targets(d, z, H.sigma2()));
        const double rel = std::abs(s.power - xo.squaredNorm()) / xo.squaredNorm();
        worst = std::max(worst, rel);
        CHECK(rel <= 1e-3);
    }
    MESSAGE("worst relative power deviation: " << worst);
}

TEST_CASE("cipm output lies in the row space and has minimum norm") {
    TestRng rng(54);
    for (int t = 0; t < 300; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K + 1, 6);
        const auto H = generate_channel(K, M, 1.0, 7000 + t);
        const auto d = random_symbols(K, 8, t);
        const auto s = cipm_solve(H, d, random_zeta(rng, K));
        const CMatrix Hh = H.H();
        // projector onto span{h_j^H}
        const CMatrix Pr = Hh.adjoint() * (Hh * Hh.adjoint()).inverse() * Hh;
        CHECK((s.x.x - Pr * s.x.x).norm() <= 1e-8 * s.x.x.norm());
        const CMatrix N = Hh.fullPivLu().kernel();
        for (int r = 0; r < 20; ++r) {
            const CVector moved = s.x.x + N * rng.cvector(N.cols());
            CHECK((Hh * moved - s.per_user_rx).norm() <= 1e-8 * (1 + moved.norm()));
            CHECK(moved.squaredNorm() >= s.power * (1 - 1e-12));
        }
    }
}

TEST_CASE("scaling the targets scales the output") {
    TestRng rng(55);
    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K, 6);
        const auto H = generate_channel(K, M, 1.0, 11000 + t);
        const auto d = random_symbols(K, 4, t);
        const RVector z = random_zeta(rng, K);
        const CVector x = cipm_solve(H, d, z).x.x;
        for (double n : {0.25, 4.0, 9.0}) {
            const CVector xn = cipm_solve(H, d, RVector(n * z)).x.x;
            CHECK((xn - std::sqrt(n) * x).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("equivalent multicast channel gives the same power") {
    TestRng rng(56);
    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K, 6);
        const auto H = generate_channel(K, M, 1.0, 13000 + t);
        const int order = t % 2 ? 4 : 8;
        const auto d = random_symbols(K, order, t);
        const RVector z = random_zeta(rng, K);
        const PskSymbol common = psk_point(order, t % order);
        const ChannelMatrix He = equivalent_multicast_channel(H, d, common);
        const SymbolVector same(K, common);
        const auto a = cipm_solve(H, d, z), b = cipm_solve(He, same, z);
        CHECK(std::abs(a.power - b.power) <= 1e-9 * a.power);
        CHECK((a.x.x - b.x.x).norm() <= 1e-9 * a.x.x.norm());
        for (int j = 0; j < K; ++j)
            CHECK(He.H().row(j).norm() == doctest::Approx(H.H().row(j).norm()).epsilon(1e-14));
    }
    CHECK_THROWS_AS(equivalent_multicast_channel(generate_channel(2, 2, 1.0, 1), random_symbols(2, 4, 1),
                                                 psk_point(8, 0)),
                    Error);
}

TEST_CASE("cipm argument checks") {
    const auto H = generate_channel(3, 2, 1.0, 1);
    try {
        cipm_solve(H, random_symbols(3, 4, 1), RVector::Ones(3));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnsupportedShape);
    }
    const auto G = generate_channel(2, 3, 1.0, 1);
    CHECK_THROWS_AS(cipm_solve(G, random_symbols(2, 4, 1), RVector::Ones(3)), Error);
    CHECK_THROWS_AS(cipm_solve(G, random_symbols(2, 4, 1), RVector::Constant(2, -1.0)), Error);
    CHECK(cipm_solve(G, random_symbols(2, 4, 1), RVector::Zero(2)).power == 0.0);
}

TEST_CASE("cimm matches the scaling-law closed form") {
    TestRng rng(57);
    for (int t = 0; t < 200; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K, 5);
        const auto H = generate_channel(K, M, 1.0, 17000 + t, rng.uniform(0.5, 2.0));
        const auto d = random_symbols(K, 4, t);
        RVector r(K);
        for (int j = 0; j < K; ++j) r(j) = rng.uniform(0.2, 3.0);
        const double P = rng.uniform(0.1, 50.0);
        const auto s = cimm_solve(H, d, r, P);
        const double closed = P / cipm_solve(H, d, r).power;
        CHECK(s.t_star == doctest::Approx(closed).epsilon(1e-5));
        CHECK(std::abs(s.q.power - P) <= 1e-6 * P * (1 + 1e-9));
        for (int j = 0; j < K; ++j)
            CHECK(std::abs(wrap_angle(std::arg(s.per_user_rx(j)) - d[j].angle())) <= 1e-8);

        const auto s2 = cimm_solve(H, d, r, 2 * P);
        CHECK(s2.t_star == doctest::Approx(2 * s.t_star).epsilon(1e-5));
    }
    const auto H = generate_channel(2, 2, 1.0, 3);
    CHECK_THROWS_AS(cimm_solve(H, random_symbols(2, 4, 1), RVector::Ones(2), 0.0), Error);
    CHECK_THROWS_AS(cimm_solve(H, random_symbols(2, 4, 1), RVector::Zero(2), 1.0), Error);
}
