#include "cip/model.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace cip;
using namespace cip_test;

TEST_CASE("channel draws are deterministic and shaped") {
    const auto a = generate_channel(2, 3, 1.0, 7);
    const auto b = generate_channel(2, 3, 1.0, 7);
    CHECK(a.K() == 2);
    CHECK(a.M() == 3);
    CHECK(a.H() == b.H());
    CHECK(generate_channel(2, 3, 1.0, 8).H() != a.H());
    CHECK_THROWS_AS(generate_channel(0, 3, 1.0, 1), Error);
    CHECK_THROWS_AS(generate_channel(1, 1, 0.0, 1), Error);
}

TEST_CASE("channel entries have the configured variance") {
    double acc = 0.0, re = 0.0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
        const cplx h = generate_channel(1, 1, 1.0, static_cast<uint64_t>(s)).H()(0, 0);
        acc += std::norm(h);
        re += h.real() * h.real();
    }
    CHECK(acc / n >= 0.99);
    CHECK(acc / n <= 1.01);
    // circular: half the energy in each quadrature
    CHECK(re / acc == doctest::Approx(0.5).epsilon(0.01));
    const auto H = generate_channel(40, 40, 2.5, 3);
    CHECK(H.H().cwiseAbs2().mean() == doctest::Approx(2.5).epsilon(0.05));
}

TEST_CASE("stream seeds separate trials and slots") {
    CHECK(stream_seed(1, 0, 0, 0) != stream_seed(1, 1, 0, 0));
    CHECK(stream_seed(1, 0, 1, 0) != stream_seed(1, 1, 0, 0));
    CHECK(stream_seed(1, 2, 3, 4) == stream_seed(1, 2, 3, 4));
    CHECK(stream_seed(2, 2, 3, 4) != stream_seed(1, 2, 3, 4));
}

TEST_CASE("psk points") {
    CHECK(std::abs(psk_point(2, 0).value - cplx(1, 0)) < 1e-15);
    CHECK(std::abs(psk_point(2, 1).value - cplx(-1, 0)) < 1e-15);
    CHECK(std::abs(psk_point(4, 1).value - psk_point(4, 0).value * cplx(0, 1)) < 1e-15);
    for (int k = 0; k < 8; ++k) {
        const auto p = psk_point(8, k), q = psk_point(8, (k + 1) % 8);
        CHECK(std::abs(std::abs(p.value) - 1.0) < 1e-12);
        CHECK(std::abs(wrap_angle(q.angle() - p.angle()) - kPi / 4) < 1e-14);
    }
    // half-step offset puts QPSK on the diagonals
    CHECK(std::abs(psk_point(4, 0, PskOffset::HalfStep).angle() - kPi / 4) < 1e-15);
    CHECK_THROWS_AS(psk_point(3, 0), Error);
    CHECK_THROWS_AS(psk_point(4, 4), Error);
    CHECK_THROWS_AS(psk_point(4, -1), Error);
    CHECK(valid_psk_order(16));
    CHECK_FALSE(valid_psk_order(1));
    CHECK_FALSE(valid_psk_order(6));
}

TEST_CASE("random symbols are uniform over the constellation") {
    std::vector<int> count(8, 0);
    for (uint64_t s = 0; s < 2000; ++s)
        for (const auto& d : random_symbols(4, 8, s)) ++count[d.index];
    for (int c : count) CHECK(std::abs(c - 1000) < 120);
}

TEST_CASE("cross correlation") {
    TestRng rng(11);
    const ChannelMatrix H(rng.cmatrix(4, 5));
    for (int j = 0; j < 4; ++j) {
        CHECK(std::abs(cross_correlation(H, j, j) - cplx(1, 0)) < 1e-12);
        for (int k = 0; k < 4; ++k) {
            cplx ip = 0;
            for (int m = 0; m < 5; ++m) ip += H.H()(j, m) * std::conj(H.H()(k, m));
            const cplx oracle = ip / (H.H().row(j).norm() * H.H().row(k).norm());
            CHECK(std::abs(cross_correlation(H, j, k) - oracle) < 1e-12);
            CHECK(std::abs(cross_correlation(H, j, k)) <= 1.0 + 1e-12);
        }
    }
    CMatrix o = CMatrix::Zero(2, 3);
    o(0, 0) = 1.0;
    o(1, 2) = cplx(0, 2);
    CHECK(std::abs(cross_correlation(ChannelMatrix(o), 0, 1)) == 0.0);
    o(1, 2) = 0.0;
    CHECK_THROWS_AS(cross_correlation(ChannelMatrix(o), 0, 1), Error);
}

TEST_CASE("interference factor") {
    TestRng rng(12);
    for (int t = 0; t < 10000; ++t) {
        const CMatrix h = rng.cmatrix(1, 4);
        const CVector w = rng.cvector(4);
        CHECK(std::abs(interference_factor(h.row(0), w)) <= 1.0 + 1e-12);
    }
    const CMatrix h = rng.cmatrix(1, 3);
    CHECK(std::abs(interference_factor(h.row(0), h.row(0).adjoint()) - cplx(1, 0)) < 1e-12);
    CRow e1 = CRow::Zero(3);
    e1(0) = 1.0;
    CVector e2 = CVector::Zero(3);
    e2(1) = 1.0;
    CHECK(std::abs(interference_factor(e1, e2)) == 0.0);
    CHECK_THROWS_AS(interference_factor(e1, CVector::Zero(3)), Error);
}

TEST_CASE("lemma-one classifier, hand cases") {
    const auto p = psk_point(2, 0), m = psk_point(2, 1);
    CHECK(classify_interference(p, p, 0.3).constructive);
    CHECK_FALSE(classify_interference(p, m, 0.3).constructive);
    const auto z = classify_interference(p, p, 0.0);
    CHECK(z.constructive);
    CHECK(z.angle_margin == doctest::Approx(kPi / 2));
}

namespace {

// angle of psi d_k inside the closed sector of d_j
bool sector_oracle(const PskSymbol& dj, cplx u) {
    const double dev = std::abs(std::remainder(std::arg(u) - dj.angle(), 2 * kPi));
    return dev <= kPi / dj.order;
}

}  // namespace

TEST_CASE("lemma-one classifier agrees with sector membership (QPSK)") {
    TestRng rng(13);
    int agree = 0;
    for (int t = 0; t < 10000; ++t) {
        const auto dj = psk_point(4, rng.integer(0, 3));
        const auto dk = psk_point(4, rng.integer(0, 3));
        const cplx psi = rng.cgauss() * 0.5;
        const auto rep = classify_interference(dj, dk, psi);
        if (rep.constructive == sector_oracle(dj, psi * dk.value)) ++agree;
        // margin is the signed distance to the nearer edge
        const double dev = std::abs(std::remainder(std::arg(psi * dk.value) - dj.angle(), 2 * kPi));
        CHECK(rep.angle_margin == doctest::Approx(kPi / 4 - dev).epsilon(1e-12));
    }
    CHECK(agree == 10000);
}

TEST_CASE("classifier is invariant under a common constellation rotation") {
    TestRng rng(14);
    for (int t = 0; t < 2000; ++t) {
        const int order = t % 2 ? 8 : 4;
        const int a = rng.integer(0, order - 1), b = rng.integer(0, order - 1);
        const int s = rng.integer(1, order - 1);
        const cplx psi = rng.cgauss();
        const bool base = classify_interference(psk_point(order, a), psk_point(order, b), psi).constructive;
        const bool rot = classify_interference(psk_point(order, (a + s) % order),
                                               psk_point(order, (b + s) % order), psi)
                             .constructive;
        CHECK(base == rot);
    }
}

TEST_CASE("mutuality is not guaranteed (exploratory)") {
    // psi_jk and psi_kj differ in general; record how often both directions agree
    TestRng rng(15);
    int both = 0, total = 0;
    for (int t = 0; t < 2000; ++t) {
        const ChannelMatrix H(rng.cmatrix(2, 3));
        const CVector w0 = H.H().row(0).adjoint().normalized();
        const CVector w1 = H.H().row(1).adjoint().normalized();
        const auto d = random_symbols(2, 4, t);
        const bool a = classify_interference(d[0], d[1], interference_factor(H.H().row(0), w1)).constructive;
        const bool b = classify_interference(d[1], d[0], interference_factor(H.H().row(1), w0)).constructive;
        total += a;
        both += a && b;
    }
    MESSAGE("constructive one way: " << total << ", both ways: " << both);
    CHECK(both <= total);
}

TEST_CASE("received signal and snr") {
    TestRng rng(16);
    const ChannelMatrix H(rng.cmatrix(3, 4), 2.0);
    const TransmitVector x(rng.cvector(4));
    const CVector y = received_signal(H, x);
    for (int j = 0; j < 3; ++j) {
        cplx acc = 0;
        for (int m = 0; m < 4; ++m) acc += H.H()(j, m) * x.x(m);
        CHECK(std::abs(y(j) - acc) < 1e-12);
    }
    const CVector z = rng.cvector(3);
    CHECK((received_signal(H, x, &z) - y - z).norm() < 1e-12);
    CHECK(received_signal(H, TransmitVector(CVector::Zero(4))).norm() == 0.0);
    const ChannelMatrix I(CMatrix::Identity(3, 3));
    const TransmitVector x3(rng.cvector(3));
    CHECK((received_signal(I, x3) - x3.x).norm() == 0.0);

    const RVector s = ci_snr(H, x);
    for (int j = 0; j < 3; ++j) CHECK(s(j) == doctest::Approx(std::norm(y(j)) / 2.0));
    const RVector s3 = ci_snr(H, TransmitVector(CVector(x.x * 3.0)));
    CHECK((s3 - 9.0 * s).norm() < 1e-10 * s3.norm());
    CMatrix one = CMatrix::Zero(1, 1);
    one(0, 0) = 2.0;
    TransmitVector u(CVector::Ones(1));
    CHECK(ci_snr(ChannelMatrix(one, 1.0), u)(0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(received_signal(H, TransmitVector(CVector::Zero(3))), Error);
    CHECK(x.power == doctest::Approx(x.x.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("detection") {
    for (int order : {2, 4, 8, 16})
        for (int k = 0; k < order; ++k) {
            const auto d = psk_point(order, k);
            const auto det = detect_psk(5.0 * d.value, order, d);
            CHECK(det.index == k);
            CHECK(det.correct);
        }
    // half-open sectors: the lower edge belongs to the sector
    CHECK(detect_index(std::polar(1.0, -kPi / 4), 4) == 0);
    CHECK(detect_index(std::polar(1.0, kPi / 4), 4) == 1);
    // a 45-degree sample demaps as the positive BPSK point
    CHECK(detect_index(std::polar(1.0, kPi / 4), 2) == 0);
    // lower-order demapping of a higher-order reference
    const auto q = psk_point(16, 1, PskOffset::HalfStep);
    CHECK(detect_psk(q.value, 4, q).correct);
    CHECK(detect_psk(q.value, 2, q).correct);
    CHECK_FALSE(detect_psk(-q.value, 2, q).correct);
    CHECK_THROWS_AS(detect_index(0.0, 4), Error);
    try {
        detect_index(0.0, 4);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AmbiguousDetection);
    }
}

TEST_CASE("received magnitude never exceeds the aligned bound") {
    TestRng rng(17);
    for (int t = 0; t < 1000; ++t) {
        const int K = 3, M = 4;
        const ChannelMatrix H(rng.cmatrix(K, M));
        CMatrix W(M, K);
        for (int k = 0; k < K; ++k) W.col(k) = rng.cvector(M).normalized();
        RVector p(K);
        for (int k = 0; k < K; ++k) p(k) = rng.uniform(0.1, 2.0);
        const auto d = random_symbols(K, 4, t);
        CVector x = CVector::Zero(M);
        for (int k = 0; k < K; ++k) x += std::sqrt(p(k)) * W.col(k) * d[k].value;
        const CVector y = H.H() * x;
        for (int j = 0; j < K; ++j) {
            double bound = 0.0;
            for (int k = 0; k < K; ++k)
                bound += std::sqrt(p(k)) * std::abs(interference_factor(H.H().row(j), W.col(k)));
            CHECK(std::abs(y(j)) <= H.H().row(j).norm() * bound * (1 + 1e-12));
        }
    }
    // orthogonal users with matched filters reach the lower bound exactly
    const ChannelMatrix I(CMatrix::Identity(2, 2));
    CVector x(2);
    x << 2.0, cplx(0, 3);
    CHECK(std::abs(received_signal(I, TransmitVector(x))(0)) == doctest::Approx(2.0));
}
