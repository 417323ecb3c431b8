#include "support.hpp"

#include <cip/bounds.hpp>
#include <cip/model.hpp>
#include <cip/precoders.hpp>

#include <doctest.h>

using namespace cip;
using cip_test::TestRng;

namespace {

CMatrix orthonormal_rows(TestRng& rng, int K, int M) {
    Eigen::HouseholderQR<CMatrix> qr(rng.cmatrix(M, M));
    const CMatrix Q = qr.householderQ();
    return Q.topRows(K);
}

double unitarity_residual(const CMatrix& B) {
    return (B * B.adjoint() - CMatrix::Identity(B.rows(), B.cols())).norm();
}

}  // namespace

TEST_CASE("correlation rotation matrix") {
    TestRng rng(41);
    const ChannelMatrix orth(orthonormal_rows(rng, 3, 4));
    const CMatrix I3 = rotation_matrix_phi(orth, random_symbols(3, 4, 1));
    CHECK((I3 - CMatrix::Identity(3, 3)).norm() <= 1e-12);

    // real positive correlation and equal symbols: nothing to rotate
    CMatrix h(2, 2);
    h << 1.0, 0.0, 0.6, 0.8;
    const ChannelMatrix H2(h);
    const SymbolVector same{psk_point(4, 1), psk_point(4, 1)};
    const CMatrix R2 = rotation_matrix_phi(H2, same);
    CHECK(std::abs(R2(0, 1) - cross_correlation(H2, 0, 1)) <= 1e-14);

    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(2, 5), M = rng.integer(K, 6);
        const ChannelMatrix H(rng.cmatrix(K, M));
        const auto d = random_symbols(K, 8, t);
        const CMatrix R = rotation_matrix_phi(H, d);
        for (int j = 0; j < K; ++j) {
            CHECK(R(j, j) == cplx(1.0, 0.0));
            for (int k = 0; k < K; ++k) {
                if (j == k) continue;
                CHECK(std::abs(R(j, k)) == doctest::Approx(std::abs(cross_correlation(H, j, k))));
                CHECK(std::abs(wrap_angle(std::arg(R(j, k) * d[k].value) - d[j].angle())) <= 1e-12);
            }
        }
    }
}

TEST_CASE("cizf product identity, alignment and power") {
    TestRng rng(42);
    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(1, 4), M = rng.integer(K, 6);
        const ChannelMatrix H(rng.cmatrix(K, M));
        const auto d = random_symbols(K, 8, 1000 + t);
        const double P = rng.uniform(0.1, 10.0);
        const auto out = cizf_precoder(H, d, P);
        const CMatrix R = rotation_matrix_phi(H, d);
        CHECK((H.H() * out.W - out.gamma * R).norm() <= 1e-8 * out.gamma * R.norm());
        CHECK(out.x.power == doctest::Approx(P).epsilon(1e-9));
        for (int j = 0; j < K; ++j)
            CHECK(std::abs(wrap_angle(std::arg(out.noiseless_rx(j)) - d[j].angle())) <= 1e-8);
    }
}

TEST_CASE("cizf on orthonormal rows is scaled zero forcing") {
    TestRng rng(43);
    const ChannelMatrix H(orthonormal_rows(rng, 3, 5));
    const auto d = random_symbols(3, 4, 9);
    const auto out = cizf_precoder(H, d, 2.0);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(out.noiseless_rx(j) - out.gamma * d[j].value) <= 1e-12);
}

TEST_CASE("cizf with two users and two antennas detects both symbols") {
    for (uint64_t s = 0; s < 500; ++s) {
        const auto H = generate_channel(2, 2, 1.0, s);
        const auto d = random_symbols(2, 4, s + 7);
        const auto out = cizf_precoder(H, d, 1.0);
        for (int j = 0; j < 2; ++j) CHECK(detect_psk(out.noiseless_rx(j), 4, d[j]).correct);
    }
}

TEST_CASE("cizf rejects nearly co-linear users") {
    TestRng rng(44);
    CMatrix h = rng.cmatrix(2, 3);
    h.row(1) = h.row(0) * cplx(0.0, 2.0);
    h(1, 0) += 1e-9;
    try {
        cizf_precoder(ChannelMatrix(h), random_symbols(2, 4, 1), 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::SingularChannel);
    }
}

TEST_CASE("plane rotation touches only its two columns and keeps B unitary") {
    TestRng rng(45);
    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(2, 5);
        Eigen::HouseholderQR<CMatrix> qr(rng.cmatrix(K, K));
        const CMatrix B0 = qr.householderQ();
        const auto d = random_symbols(K, 8, t);
        const int j = rng.integer(0, K - 2), k = rng.integer(j + 1, K - 1);
        CMatrix B = B0;
        apply_plane_rotation(B, d, k, j, rng.uniform(-kPi, kPi), rng.uniform(-kPi, kPi));
        for (int c = 0; c < K; ++c)
            if (c != j && c != k) CHECK((B.col(c) - B0.col(c)).norm() <= 1e-12);
        CHECK(unitarity_residual(B) <= 1e-9);
    }
}

TEST_CASE("cimrt keeps B unitary over full sweeps and meets the budget") {
    TestRng rng(46);
    int rotated = 0;
    for (int t = 0; t < 1000; ++t) {
        const int K = rng.integer(2, 4), M = rng.integer(K, 5);
        const auto H = generate_channel(K, M, 1.0, 5000 + t);
        const auto d = random_symbols(K, 4, t);
        const double P = rng.uniform(0.5, 4.0);
        const auto out = cimrt_precoder(H, d, equal_powers(K, P), P);
        CHECK(unitarity_residual(out.state.B) <= 1e-9);
        CHECK(out.x.power == doctest::Approx(P).epsilon(1e-9));
        CHECK(out.state.planes.size() == static_cast<size_t>(K * (K - 1) / 2));
        CHECK((H.H() * out.x.x - out.noiseless_rx).norm() <= 1e-12 * std::sqrt(P) * H.H().norm());
        for (const auto& p : out.state.planes) rotated += p.status != PlaneStatus::Skipped;
    }
    MESSAGE("planes rotated or reduced: " << rotated);
}

TEST_CASE("cimrt with one user is the matched filter") {
    TestRng rng(47);
    for (int t = 0; t < 50; ++t) {
        const int M = rng.integer(1, 5);
        const ChannelMatrix H(rng.cmatrix(1, M));
        const auto d = random_symbols(1, 8, t);
        const double P = rng.uniform(0.5, 3.0);
        const auto out = cimrt_precoder(H, d, RVector::Constant(1, P), P);
        CHECK(out.state.planes.empty());
        const CVector mf = H.H().row(0).adjoint() / H.H().row(0).norm() * std::sqrt(P) * d[0].value;
        CHECK((out.x.x - mf).norm() <= 1e-10);
        CHECK(std::abs(out.noiseless_rx(0)) == doctest::Approx(std::sqrt(P) * H.H().row(0).norm()));
        CHECK(std::abs(out.angle_error(0)) <= 1e-10);
    }
}

TEST_CASE("cimrt on orthonormal rows reduces to the matched filter") {
    TestRng rng(48);
    for (int t = 0; t < 50; ++t) {
        const ChannelMatrix H(orthonormal_rows(rng, 3, 4));
        const auto d = random_symbols(3, 4, t);
        RVector p(3);
        p << 0.5, 1.0, 1.5;
        const auto out = cimrt_precoder(H, d, p, 3.0);
        CHECK(out.state.xi().cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                if (j != k) CHECK(std::abs(out.state.xi()(j, k)) <= 1e-10);
        auto w = nmrt_precoder(H);
        w.powers = p;
        const CVector ref = linear_transmit(w, d);
        CHECK((out.x.x - ref * std::sqrt(3.0 / ref.squaredNorm())).norm() <= 1e-9);
    }
}

TEST_CASE("alignment roots stay under the root-sum-square targets") {
    // |c a + s b| <= sqrt(|a|^2 + |b|^2): a root meeting its full target has
    // enlarged the diagonal, every other root falls short of it
    int full = 0, roots = 0;
    for (uint64_t s = 0; s < 1000; ++s) {
        const auto H = generate_channel(2, 3, 1.0, s);
        const auto d = random_symbols(2, 4, s + 1);
        const CMatrix X = cimrt_init(H).xi();
        RotationResult rr;
        try {
            rr = solve_rotation_pair(X(1, 1), X(1, 0), X(0, 1), X(0, 0), d[1].value, d[0].value);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::RotationInfeasible);
            continue;
        }
        for (const auto& r : rr.roots) {
            ++roots;
            CHECK(r.achieved_k <= rr.target_k * (1 + 1e-9));
            CHECK(r.achieved_j <= rr.target_j * (1 + 1e-9));
            if (r.ratio >= 1 - 1e-12) {
                ++full;
                CHECK(r.achieved_k >= std::abs(X(1, 1)) * (1 - 1e-9));
            }
        }
        const auto out = cimrt_precoder(H, d, equal_powers(2, 1.0), 1.0);
        for (const auto& p : out.state.planes)
            if (p.status == PlaneStatus::Rotated)
                CHECK(std::abs(p.xi_kk_after) >= std::abs(p.xi_kk_before) * (1 - 1e-9));
    }
    MESSAGE(roots << " alignment roots, " << full << " meeting the full targets");
}

TEST_CASE("cimrt argument checks") {
    TestRng rng(49);
    const ChannelMatrix H(rng.cmatrix(2, 3));
    const auto d = random_symbols(2, 4, 1);
    CHECK_THROWS_AS(cimrt_precoder(H, d, RVector::Ones(3), 1.0), Error);
    CHECK_THROWS_AS(cimrt_precoder(H, d, -RVector::Ones(2), 1.0), Error);
    CHECK_THROWS_AS(cimrt_precoder(H, d, RVector::Ones(2), 0.0), Error);
    try {
        cimrt_precoder(ChannelMatrix(rng.cmatrix(3, 2)), random_symbols(3, 4, 1), RVector::Ones(3), 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnsupportedShape);
    }
}
