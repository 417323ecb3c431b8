#include "cip/linalg.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

namespace cip {

namespace {

struct DualPoint {
    bool ok = false;
    double f = 0.0;
    CMatrix Zinv;
};

}  // namespace

// Log-barrier Newton on the dual
//   max zeta'lambda  s.t.  sum_j lambda_j h_j^H h_j <= I,  lambda >= 0
// Central points give Q = mu Z^{-1} with an exact gap of mu (M + n).
SdpSolution solve_sdp_min_trace(const CMatrix& h, const RVector& zeta) {
    const int K = static_cast<int>(h.rows()), M = static_cast<int>(h.cols());
    if (zeta.size() != K) throw Error(Errc::DimensionMismatch, "zeta length differs from K");
    if ((zeta.array() < 0).any() || !zeta.allFinite())
        throw Error(Errc::InvalidArgument, "zeta must be finite and >= 0");

    std::vector<int> act;
    for (int j = 0; j < K; ++j) {
        if (zeta(j) <= 0.0) continue;
        if (h.row(j).norm() == 0.0)
            throw Error(Errc::Infeasible, "user with positive target has a zero channel");
        act.push_back(j);
    }
    SdpSolution sol;
    sol.lambda = RVector::Zero(K);
    sol.Q = CMatrix::Zero(M, M);
    const int n = static_cast<int>(act.size());
    if (n == 0) return sol;

    const double zs = zeta.maxCoeff();
    CMatrix a(M, n);
    RVector z(n);
    for (int i = 0; i < n; ++i) {
        a.col(i) = h.row(act[i]).adjoint();
        z(i) = zeta(act[i]) / zs;
    }

    auto evaluate = [&](const RVector& lam, double mu) {
        DualPoint d;
        if ((lam.array() <= 0).any()) return d;
        CMatrix Z = CMatrix::Identity(M, M);
        for (int i = 0; i < n; ++i) Z -= lam(i) * a.col(i) * a.col(i).adjoint();
        Eigen::LLT<CMatrix> llt(Z);
        if (llt.info() != Eigen::Success) return d;
        double logdet = 0.0;
        for (int m = 0; m < M; ++m) {
            const double diag = std::real(llt.matrixLLT()(m, m));
            if (!(diag > 0)) return d;
            logdet += 2.0 * std::log(diag);
        }
        d.ok = true;
        d.f = z.dot(lam) + mu * (logdet + lam.array().log().sum());
        d.Zinv = llt.solve(CMatrix::Identity(M, M));
        return d;
    };

    RVector lam(n);
    for (int i = 0; i < n; ++i) lam(i) = 0.5 / (n * a.col(i).squaredNorm());
    double mu = std::max(z.dot(lam) / (M + n), 1e-12);
    DualPoint cur = evaluate(lam, mu);
    int iters = 0;

    for (;;) {
        // centering
        for (;;) {
            if (++iters > kSdpIterationCap) {
                const double primal = mu * cur.Zinv.trace().real();
                throw Error(Errc::SolverFailure, "SDP iteration cap reached",
                            (primal - z.dot(lam)) / std::max(primal, 1e-300));
            }
            const CMatrix B = a.adjoint() * cur.Zinv * a;
            RVector g(n);
            RMatrix Hn(n, n);  // negated Hessian
            for (int i = 0; i < n; ++i) {
                g(i) = z(i) - mu * B(i, i).real() + mu / lam(i);
                for (int k = 0; k < n; ++k) Hn(i, k) = mu * std::norm(B(i, k));
                Hn(i, i) += mu / (lam(i) * lam(i));
            }
            const RVector step = Hn.ldlt().solve(g);
            const double dec = g.dot(step);
            // second clause: below roundoff of the objective itself
            if (!(dec >= 0) || dec <= 1e-13 * mu || dec <= 1e-15 * std::max(1.0, std::abs(cur.f)))
                break;
            double t = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls, t *= 0.5) {
                const RVector trial = lam + t * step;
                DualPoint nx = evaluate(trial, mu);
                if (nx.ok && nx.f >= cur.f + 0.25 * t * dec) {
                    if (trial == lam) break;
                    lam = trial;
                    cur = std::move(nx);
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        const double dual = z.dot(lam);
        if (mu * (M + n) <= 1e-9 * std::max(dual, 1e-300)) break;
        mu *= 0.1;
        cur = evaluate(lam, mu);
    }

    // Feasible primal candidates rescaled until every constraint holds
    auto make_feasible = [&](CMatrix Q) {
        Q = 0.5 * (Q + Q.adjoint()).eval();
        double scale = 1.0;
        for (int i = 0; i < n; ++i) {
            const double got = (a.col(i).adjoint() * Q * a.col(i))(0).real();
            if (!(got > 0)) return CMatrix(CMatrix::Zero(0, 0));
            scale = std::max(scale, z(i) / got);
        }
        return CMatrix(Q * scale);
    };

    CMatrix Q = make_feasible(mu * cur.Zinv);

    // mu Z^{-1} carries roundoff of order eps/mu along the near-null space of Z.
    // Polish: restrict to that space and enforce complementary slackness
    // (a_i^H Q a_i = z_i for every user with a live multiplier).
    {
        CMatrix Z = CMatrix::Identity(M, M);
        for (int i = 0; i < n; ++i) Z -= lam(i) * a.col(i) * a.col(i).adjoint();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(Z);
        // on the central path lambda_i * slack_i = mu, so a user is tight when
        // its implied slack mu / lambda_i is negligible
        std::vector<int> live;
        for (int i = 0; i < n; ++i)
            if (mu / lam(i) <= std::sqrt(mu) * z(i)) live.push_back(i);
        const int L = static_cast<int>(live.size());
        // the split between null and range eigenvalues is not known a priori
        for (double thr : {std::sqrt(mu), std::pow(mu, 0.75), std::pow(mu, 0.25), 1e3 * mu}) {
            std::vector<int> null_idx;
            for (int m = 0; m < M; ++m)
                if (es.eigenvalues()(m) <= thr) null_idx.push_back(m);
            const int r = static_cast<int>(null_idx.size());
            if (r == 0) continue;
            CMatrix V(M, r);
            for (int c = 0; c < r; ++c) V.col(c) = es.eigenvectors().col(null_idx[c]);
            CMatrix X = V.adjoint() * (mu * cur.Zinv) * V;
            const CMatrix Va = V.adjoint() * a;  // r x n
            RMatrix G(L, L);
            for (int p = 0; p < L; ++p)
                for (int q = 0; q < L; ++q) G(p, q) = std::norm(Va.col(live[p]).dot(Va.col(live[q])));
            const auto cod = G.completeOrthogonalDecomposition();
            // alternate: exact live constraints, then the PSD cone
            for (int round = 0; round < 10; ++round) {
                RVector rhs(L);
                for (int p = 0; p < L; ++p) {
                    const auto vp = Va.col(live[p]);
                    rhs(p) = z(live[p]) - (vp.adjoint() * X * vp)(0).real();
                }
                if (rhs.cwiseAbs().maxCoeff() <= 1e-14) break;
                const RVector y = cod.solve(rhs);
                for (int p = 0; p < L; ++p) X += y(p) * Va.col(live[p]) * Va.col(live[p]).adjoint();
                Eigen::SelfAdjointEigenSolver<CMatrix> ex(0.5 * (X + X.adjoint()));
                if (ex.eigenvalues().minCoeff() >= 0) break;
                const RVector ev = ex.eigenvalues().cwiseMax(0.0);
                X = ex.eigenvectors() * ev.cast<cplx>().asDiagonal() * ex.eigenvectors().adjoint();
            }
            const CMatrix Qp = make_feasible(V * X * V.adjoint());
            if (Qp.size() && (Q.size() == 0 || Qp.trace().real() < Q.trace().real())) Q = Qp;
        }
    }
    if (Q.size() == 0) throw Error(Errc::SolverFailure, "SDP primal recovery failed");

    sol.Q = Q * zs;
    sol.primal_value = sol.Q.trace().real();
    sol.dual_value = z.dot(lam) * zs;
    for (int i = 0; i < n; ++i) sol.lambda(act[i]) = lam(i);
    sol.dual_gap = (sol.primal_value - sol.dual_value) / std::max(sol.primal_value, 1e-300);
    sol.iterations = iters;
    if (!(sol.dual_gap <= 1e-5))
        throw Error(Errc::SolverFailure, "SDP did not reach the gap tolerance", sol.dual_gap);
    return sol;
}

}  // namespace cip
