#include "cip/power.hpp"
#include "cip/linalg.hpp"

#include <cmath>

namespace cip {

CipmSolution cipm_solve(const ChannelMatrix& H, const SymbolVector& d, const SnrTargets& t) {
    const int K = H.K();
    if (static_cast<int>(d.size()) != K || t.zeta.size() != K)
        throw Error(Errc::DimensionMismatch, "symbols and targets must have K entries");
    if (K > H.M())
        throw Error(Errc::UnsupportedShape, "CIPM needs linearly independent rows (K <= M)");
    if ((t.zeta.array() < 0).any() || !t.zeta.allFinite())
        throw Error(Errc::InvalidArgument, "SNR targets must be finite and >= 0");
    if (!(t.sigma2 >= 0)) throw Error(Errc::InvalidArgument, "noise variance must be >= 0");

    const double sigma = std::sqrt(t.sigma2);
    CVector y(K);
    for (int j = 0; j < K; ++j) y(j) = sigma * std::sqrt(t.zeta(j)) * d[j].value;

    // real/imaginary alignment rows in (Re nu, Im nu):  (H H^H) nu = y
    const CMatrix gram = H.H() * H.H().adjoint();
    RMatrix A(2 * K, 2 * K);
    A << gram.real(), -gram.imag(), gram.imag(), gram.real();
    auto solve = [&](const CVector& rhs) {
        RVector b(2 * K);
        b << rhs.real(), rhs.imag();
        const RVector z = solve_real_linear(A, b);
        CVector nu(K);
        for (int j = 0; j < K; ++j) nu(j) = cplx(z(j), z(K + j));
        return nu;
    };

    CipmSolution s;
    s.condition = condition_number(A);
    s.nu = solve(y);
    // one step of iterative refinement
    s.nu += solve(y - gram * s.nu);
    s.x = TransmitVector(H.H().adjoint() * s.nu);
    s.power = s.x.power;
    s.per_user_rx = H.H() * s.x.x;
    return s;
}

CipmSolution cipm_solve(const ChannelMatrix& H, const SymbolVector& d, const RVector& zeta) {
    return cipm_solve(H, d, SnrTargets{zeta, H.sigma2()});
}

ChannelMatrix equivalent_multicast_channel(const ChannelMatrix& H, const SymbolVector& d,
                                           const PskSymbol& d_common) {
    if (static_cast<int>(d.size()) != H.K())
        throw Error(Errc::DimensionMismatch, "symbol vector length differs from K");
    CMatrix He = H.H();
    for (int j = 0; j < H.K(); ++j) {
        if (d[j].order != d_common.order)
            throw Error(Errc::InvalidArgument, "common symbol must share the constellation order");
        He.row(j) *= std::polar(1.0, d_common.angle() - d[j].angle());
    }
    return ChannelMatrix(std::move(He), H.sigma2());
}

CimmSolution cimm_solve(const ChannelMatrix& H, const SymbolVector& d, const RVector& r, double P,
                        double delta) {
    if (!(P > 0.0)) throw Error(Errc::InvalidArgument, "power budget must be > 0");
    if (r.size() != H.K() || !(r.array() > 0).all())
        throw Error(Errc::InvalidArgument, "weights must be K positive values");
    if (delta <= 0) delta = 1e-6 * P;

    CimmSolution out;
    auto power_at = [&](double t) {
        ++out.iterations;
        return cipm_solve(H, d, RVector(t * r)).power;
    };
    double hi = 1.0;
    for (int n = 0; power_at(hi) < P; ++n) {
        if (n > 200) throw Error(Errc::SolverFailure, "could not bracket the power budget");
        hi *= 2.0;
    }
    const BisectResult br = bisect(
        [&](double t) {
            const double p = power_at(t);
            return Probe{p <= P, std::abs(p - P) <= delta};
        },
        0.0, hi, hi * 1e-15);
    out.t_star = br.t;
    const CipmSolution s = cipm_solve(H, d, RVector(br.t * r));
    out.q = s.x;
    out.per_user_rx = s.per_user_rx;
    return out;
}

}  // namespace cip
