#include "cip/linalg.hpp"

#include <cmath>

namespace cip {

// Simplex on the dual  max zeta'y  s.t.  G'y <= 1, y >= 0.  The slack basis is
// feasible from the start, and the primal p is read off the reduced costs of
// the slack columns at the optimum.
LpSolution solve_lp_min_sum(const RMatrix& G, const RVector& zeta) {
    const int K = static_cast<int>(G.rows());
    if (G.cols() != K || zeta.size() != K)
        throw Error(Errc::DimensionMismatch, "LP needs square G and matching zeta");
    if (!G.allFinite() || !zeta.allFinite())
        throw Error(Errc::InvalidArgument, "LP data must be finite");
    if ((zeta.array() < 0).any()) throw Error(Errc::InvalidArgument, "zeta must be >= 0");
    if ((G.array() < 0).any()) throw Error(Errc::InvalidArgument, "G must be nonnegative");

    const int cols = 2 * K + 1, rhs = 2 * K;
    RMatrix T = RMatrix::Zero(K, cols);
    T.leftCols(K) = G.transpose();
    T.block(0, K, K, K).setIdentity();
    T.col(rhs).setOnes();
    RVector obj = RVector::Zero(cols);
    obj.head(K) = -zeta;
    std::vector<int> basis(K);
    for (int i = 0; i < K; ++i) basis[i] = K + i;

    const double zscale = std::max(1.0, zeta.maxCoeff());
    const double gscale = std::max(1.0, G.maxCoeff());
    const double eps_obj = 1e-13 * zscale;
    const double eps_piv = 1e-13 * gscale;

    LpSolution sol;
    for (int pivots = 0;; ++pivots) {
        if (pivots > 10000) throw Error(Errc::SolverFailure, "LP pivot limit reached");
        int enter = -1;
        for (int j = 0; j < 2 * K; ++j)
            if (obj(j) < -eps_obj) {
                enter = j;
                break;
            }
        if (enter < 0) {
            sol.pivots = pivots;
            break;
        }
        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < K; ++i) {
            if (T(i, enter) <= eps_piv) continue;
            const double r = T(i, rhs) / T(i, enter);
            if (leave < 0 || r < best || (r == best && basis[i] < basis[leave])) {
                leave = i;
                best = r;
            }
        }
        if (leave < 0)
            throw Error(Errc::Infeasible,
                        "LP infeasible: a user with a positive target receives no power");
        T.row(leave) /= T(leave, enter);
        for (int i = 0; i < K; ++i)
            if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
        obj -= obj(enter) * T.row(leave).transpose();
        basis[leave] = enter;
    }

    sol.p = obj.segment(K, K).cwiseMax(0.0);
    sol.objective = sol.p.sum();
    const RVector slack = G * sol.p - zeta;
    for (int k = 0; k < K; ++k)
        if (std::abs(slack(k)) <= 1e-9 * std::max(1.0, zeta(k)) && zeta(k) > 0)
            sol.tight_constraints.push_back(k);
    return sol;
}

}  // namespace cip
