#pragma once

#include "cip/types.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cip_test {

using cip::cplx;
using cip::CMatrix;
using cip::CVector;
using cip::RMatrix;
using cip::RVector;

// Test-side generator, deliberately separate from the library's streams.
struct TestRng {
    std::mt19937_64 eng;
    explicit TestRng(uint64_t seed) : eng(seed) {}
    double uniform(double a = 0.0, double b = 1.0) {
        return std::uniform_real_distribution<double>(a, b)(eng);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    cplx cgauss() {
        std::normal_distribution<double> n(0.0, std::sqrt(0.5));
        const double re = n(eng);
        return {re, n(eng)};
    }
    CMatrix cmatrix(int r, int c) {
        CMatrix m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = cgauss();
        return m;
    }
    CVector cvector(int n) { return cmatrix(n, 1).col(0); }
};

// Gaussian elimination with partial pivoting, written out longhand.
inline RVector eliminate(RMatrix A, RVector b) {
    const int n = static_cast<int>(A.rows());
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
        A.row(c).swap(A.row(piv));
        std::swap(b(c), b(piv));
        for (int r = c + 1; r < n; ++r) {
            const double f = A(r, c) / A(c, c);
            for (int k = c; k < n; ++k) A(r, k) -= f * A(c, k);
            b(r) -= f * b(c);
        }
    }
    RVector x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b(r);
        for (int k = r + 1; k < n; ++k) s -= A(r, k) * x(k);
        x(r) = s / A(r, r);
    }
    return x;
}

// Exact LP optimum by vertex enumeration: three of the six constraints
// (G p >= z rows, p >= 0) held with equality.
inline double lp_vertex_oracle(const RMatrix& G, const RVector& z) {
    RMatrix C(6, 3);
    RVector c(6);
    C << G, RMatrix::Identity(3, 3);
    c << z, RVector::Zero(3);
    double best = 1e300;
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
            for (int d = b + 1; d < 6; ++d) {
                RMatrix A(3, 3);
                RVector r(3);
                A << C.row(a), C.row(b), C.row(d);
                r << c(a), c(b), c(d);
                if (std::abs(A.determinant()) < 1e-12) continue;
                const RVector p = eliminate(A, r);
                if (((C * p - c).array() >= -1e-10).all()) best = std::min(best, p.sum());
            }
    return best;
}

// Quadratic penalty minimizer of ||x||^2 + rho ||H x - y||^2; tends to the
// minimum-norm solution of H x = y as rho grows.
inline CVector penalty_oracle(const CMatrix& H, const CVector& y) {
    const double rho = 1e9 / H.squaredNorm();
    CMatrix A = rho * H.adjoint() * H;
    A.diagonal().array() += 1.0;
    return A.fullPivLu().solve(rho * H.adjoint() * y);
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Rank-one multicast for M = 2 over unit directions (cos t, sin t e^{i phi}).
inline double sdp_direction_oracle(const CMatrix& h, const RVector& z) {
    auto cost = [&](double t, double ph) {
        CVector u(2);
        u << std::cos(t), std::sin(t) * std::polar(1.0, ph);
        double need = 0.0;
        for (int j = 0; j < h.rows(); ++j) need = std::max(need, z(j) / std::norm(h.row(j).dot(u.conjugate())));
        return need;
    };
    double best = 1e300, bt = 0, bp = 0;
    const int N = 400;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j < 2 * N; ++j) {
            const double t = cip::kPi / 2 * i / N, ph = 2 * cip::kPi * j / (2 * N);
            const double c = cost(t, ph);
            if (c < best) best = c, bt = t, bp = ph;
        }
    double ht = cip::kPi / 2 / N, hp = 2 * cip::kPi / (2 * N);
    for (int level = 0; level < 8; ++level) {
        const double ct = bt, cp = bp;
        for (int i = -20; i <= 20; ++i)
            for (int j = -20; j <= 20; ++j) {
                const double t = ct + ht * i / 10, ph = cp + hp * j / 10;
                const double c = cost(t, ph);
                if (c < best) best = c, bt = t, bp = ph;
            }
        ht /= 10;
        hp /= 10;
    }
    return best;
}

}  // namespace cip_test
