#pragma once

#include "cip/types.hpp"

#include <functional>

namespace cip {

struct SvdFactors {
    CMatrix S;  // K x K
    RMatrix V;  // K x M, singular values on the diagonal
    CMatrix D;  // M x M
    RVector singular_values;
};

SvdFactors svd_decompose(const ChannelMatrix& H);
SvdFactors svd_decompose(const CMatrix& H);

struct EigenPairs {
    RVector values;   // descending
    CMatrix vectors;  // columns
};

EigenPairs hermitian_eig(const CMatrix& A);

// Ratio of extreme singular values; +inf when singular.
double condition_number(const RMatrix& A);
double condition_number(const CMatrix& A);

inline constexpr double kMaxCondition = 1e12;

RVector solve_real_linear(const RMatrix& A, const RVector& b);

struct LpSolution {
    RVector p;
    double objective = 0.0;
    std::vector<int> tight_constraints;
    int pivots = 0;
};

// min sum(p) s.t. G p >= zeta, p >= 0
LpSolution solve_lp_min_sum(const RMatrix& G, const RVector& zeta);

struct SdpSolution {
    CMatrix Q;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double dual_gap = 0.0;  // relative
    int iterations = 0;
    RVector lambda;
};

inline constexpr int kSdpIterationCap = 100000;

// min tr(Q) s.t. h_j Q h_j^H >= zeta_j, Q psd; rows of `h` are the h_j
SdpSolution solve_sdp_min_trace(const CMatrix& h, const RVector& zeta);

struct Probe {
    bool feasible = false;
    bool converged = false;  // caller-side stopping rule met at this t
};

struct BisectResult {
    double t = 0.0;
    double lo = 0.0, hi = 0.0;
    int iterations = 0;
};

// Largest feasible t in [lo, hi] for a predicate feasible on [lo, t*].
// A probe reporting converged ends the search at that t, on either side.
BisectResult bisect(const std::function<Probe(double)>& probe, double lo, double hi,
                    double tol);

struct RotationOptions {
    double shrink = 0.9;
    int max_retries = 20;
};

struct RotationRoot {
    double alpha = 0.0;
    double delta = 0.0;
    // achieved real magnitudes (xi'_kk, xi'_jj) and their ratio to the targets
    double achieved_k = 0.0, achieved_j = 0.0;
    double ratio = 0.0;
};

struct RotationResult {
    RotationRoot root;                 // best root
    std::vector<RotationRoot> roots;   // all alignment roots that met the final level
    double target_k = 0.0, target_j = 0.0;
    double reduction = 1.0;            // shrink^n applied to the targets
    int retries = 0;
    double residual = 0.0;             // of both complex equations at the best root
};

// Rotation of the (k, j) plane solving
//   xi'_kk d_k = c xi_kk d_k - s e^{-i delta} xi_kj d_j
//   xi'_jj d_j = s e^{i delta} xi_jk d_k + c xi_jj d_j
// with real positive xi'. Targets default to the root-sum-square optima.
RotationResult solve_rotation_pair(cplx xi_kk, cplx xi_kj, cplx xi_jk, cplx xi_jj,
                                   cplx d_k, cplx d_j, double target_k = -1.0,
                                   double target_j = -1.0,
                                   const RotationOptions& opt = {});

// Residual of the two complex equations at (alpha, delta) with magnitudes (a_k, a_j).
double rotation_residual(cplx xi_kk, cplx xi_kj, cplx xi_jk, cplx xi_jj, cplx d_k,
                         cplx d_j, double alpha, double delta, double a_k, double a_j);

struct RateAllocation {
    RVector p;
    double value = 0.0;  // sum_k w_k log2(1 + (A p)_k)
    double gap = 0.0;    // Frank-Wolfe certificate
    int iterations = 0;
};

// max sum_k w_k log2(1 + (A p)_k) over p >= 0, sum p <= budget; A nonnegative
RateAllocation maximize_log_rates(const RMatrix& A, const RVector& w, double budget);

// Euclidean projection onto {p >= 0, sum p = s}
RVector project_simplex(const RVector& v, double s);

}  // namespace cip
