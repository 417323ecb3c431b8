#include "cip/bounds.hpp"
#include "cip/precoders.hpp"
#include "rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cip {

const char* bound_kind_name(BoundKind k) {
    switch (k) {
    case BoundKind::GeniePower: return "genie_pwr";
    case BoundKind::MulticastPower: return "multicast_pwr";
    case BoundKind::MulticastPowerRank1: return "multicast_pwr_rank1";
    case BoundKind::MulticastSumRate: return "multicast_sumrate";
    case BoundKind::GenieSumRate: return "genie_sumrate";
    }
    return "?";
}

namespace {

RMatrix genie_gains(const RVector& g_norms, const CMatrix& xi) {
    const Eigen::Index K = xi.rows();
    if (xi.cols() != K || g_norms.size() != K)
        throw Error(Errc::DimensionMismatch, "xi must be K x K with K row norms");
    RMatrix A(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < K; ++j) A(k, j) = g_norms(k) * g_norms(k) * std::norm(xi(k, j));
    return A;
}

}  // namespace

BoundResult genie_min_power(const RVector& g_norms, const CMatrix& xi, const RVector& zeta) {
    const LpSolution lp = solve_lp_min_sum(genie_gains(g_norms, xi), zeta);
    BoundResult b;
    b.kind = BoundKind::GeniePower;
    b.value = lp.objective;
    b.powers = lp.p;
    std::ostringstream os;
    os << "pivots=" << lp.pivots << " tight=";
    for (size_t i = 0; i < lp.tight_constraints.size(); ++i)
        os << (i ? "," : "") << lp.tight_constraints[i];
    b.certificate = os.str();
    return b;
}

BoundResult genie_min_power(const ChannelMatrix& H, const RVector& zeta) {
    const CimrtState st = cimrt_init(H);
    return genie_min_power(st.g_norms, st.xi(), H.sigma2() * zeta);
}

BoundResult multicast_min_power(const ChannelMatrix& H, const RVector& zeta) {
    if (zeta.size() != H.K()) throw Error(Errc::DimensionMismatch, "zeta length differs from K");
    const SdpSolution s = solve_sdp_min_trace(H.H(), H.sigma2() * zeta);
    BoundResult b;
    b.kind = BoundKind::MulticastPower;
    b.value = s.primal_value;
    b.Q = s.Q;
    std::ostringstream os;
    os << "gap=" << s.dual_gap << " dual=" << s.dual_value << " iterations=" << s.iterations;
    b.certificate = os.str();
    return b;
}

BoundResult multicast_min_power_rank1(const ChannelMatrix& H, const RVector& zeta, int samples,
                                      uint64_t seed) {
    if (samples < 1) throw Error(Errc::InvalidArgument, "need at least one randomization sample");
    const BoundResult sdp = multicast_min_power(H, zeta);
    const RVector target = H.sigma2() * zeta;
    const int K = H.K(), M = H.M();
    BoundResult b;
    b.kind = BoundKind::MulticastPowerRank1;
    if (target.maxCoeff() <= 0) {
        b.Q = CMatrix::Zero(M, M);
        b.certificate = "zero targets";
        return b;
    }
    // power needed along direction v after feasibility rescaling
    auto scaled = [&](const CVector& v) {
        double s = 0.0;
        for (int j = 0; j < K; ++j) {
            if (target(j) <= 0) continue;
            const double g = std::norm((H.H().row(j) * v)(0));
            if (!(g > 0)) return std::numeric_limits<double>::infinity();
            s = std::max(s, target(j) / g);
        }
        return s * v.squaredNorm();
    };
    const EigenPairs ep = hermitian_eig(sdp.Q);
    double best = scaled(ep.vectors.col(0));
    CVector best_v = ep.vectors.col(0);
    int best_sample = 0;
    CMatrix root = CMatrix::Zero(M, M);
    for (int i = 0; i < M; ++i)
        root += std::sqrt(std::max(ep.values(i), 0.0)) * ep.vectors.col(i) * ep.vectors.col(i).adjoint();
    Rng rng(seed);
    for (int n = 1; n <= samples; ++n) {
        CVector z(M);
        for (int i = 0; i < M; ++i) z(i) = rng.cgauss();
        const CVector v = root * z;
        const double p = scaled(v);
        if (p < best) {
            best = p;
            best_v = v;
            best_sample = n;
        }
    }
    if (!std::isfinite(best))
        throw Error(Errc::SolverFailure, "no feasible rank-one candidate found");
    b.value = best;
    const CVector u = best_v.normalized() * std::sqrt(best);
    b.Q = u * u.adjoint();
    std::ostringstream os;
    os << "samples=" << samples << " best=" << (best_sample == 0 ? "principal" : "random#")
       << (best_sample == 0 ? std::string() : std::to_string(best_sample))
       << " sdp=" << sdp.value;
    b.certificate = os.str();
    return b;
}

BoundResult multicast_max_sumrate(const ChannelMatrix& H, double P, const RVector& weights) {
    if (!(P > 0)) throw Error(Errc::InvalidArgument, "power budget must be > 0");
    const int K = H.K(), M = H.M();
    if (weights.size() != K) throw Error(Errc::DimensionMismatch, "weights length differs from K");
    const double s2 = H.sigma2();
    if (!(s2 > 0)) throw Error(Errc::InvalidArgument, "sum rate needs sigma2 > 0");
    const double ln2 = std::log(2.0);
    const CMatrix& h = H.H();

    auto value = [&](const CMatrix& Q) {
        double f = 0.0;
        for (int j = 0; j < K; ++j)
            f += weights(j) * std::log1p((h.row(j) * Q * h.row(j).adjoint())(0).real() / s2) / ln2;
        return f;
    };
    auto gradient = [&](const CMatrix& Q) {
        CMatrix g = CMatrix::Zero(M, M);
        for (int j = 0; j < K; ++j) {
            const double q = (h.row(j) * Q * h.row(j).adjoint())(0).real();
            g += weights(j) / (ln2 * (s2 + q)) * h.row(j).adjoint() * h.row(j);
        }
        return g;
    };
    auto project = [&](const CMatrix& Y) {
        const EigenPairs ep = hermitian_eig(0.5 * (Y + Y.adjoint()));
        const RVector lam = project_simplex(ep.values, P);
        return CMatrix(ep.vectors * lam.cast<cplx>().asDiagonal() * ep.vectors.adjoint());
    };

    CMatrix Q = CMatrix::Identity(M, M) * (P / M);
    double f = value(Q);
    CMatrix g = gradient(Q);
    double step = P / std::max(g.norm(), 1e-300);
    double gap = 0.0;
    int it = 0;
    for (;; ++it) {
        const double lmax = hermitian_eig(0.5 * (g + g.adjoint())).values(0);
        gap = P * std::max(lmax, 0.0) - (g * Q).trace().real();
        if (gap <= 1e-9 * std::max(1.0, f)) break;
        if (it >= 20000)
            throw Error(Errc::SolverFailure, "multicast sum-rate did not converge", gap);
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const CMatrix Qn = project(Q + step * g);
            const double fn = value(Qn);
            if (fn >= f + 1e-4 * (g * (Qn - Q)).trace().real()) {
                moved = (Qn - Q).norm() > 0;
                Q = Qn;
                f = fn;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        g = gradient(Q);
    }
    BoundResult b;
    b.kind = BoundKind::MulticastSumRate;
    b.value = f;
    b.Q = Q;
    std::ostringstream os;
    os << "gap=" << gap << " iterations=" << it;
    b.certificate = os.str();
    return b;
}

BoundResult genie_sumrate(const RVector& g_norms, const CMatrix& xi, double P) {
    const RMatrix A = genie_gains(g_norms, xi);
    const RateAllocation ra = maximize_log_rates(A, RVector::Ones(A.rows()), P);
    BoundResult b;
    b.kind = BoundKind::GenieSumRate;
    b.value = ra.value;
    b.powers = ra.p;
    std::ostringstream os;
    os << "gap=" << ra.gap << " iterations=" << ra.iterations;
    b.certificate = os.str();
    return b;
}

BoundResult genie_sumrate(const ChannelMatrix& H, double P) {
    if (!(H.sigma2() > 0)) throw Error(Errc::InvalidArgument, "sum rate needs sigma2 > 0");
    const CimrtState st = cimrt_init(H);
    return genie_sumrate(st.g_norms / std::sqrt(H.sigma2()), st.xi(), P);
}

}  // namespace cip
