#include "cip/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cip {

SvdFactors svd_decompose(const ChannelMatrix& H) { return svd_decompose(H.H()); }

SvdFactors svd_decompose(const CMatrix& H) {
    const int K = static_cast<int>(H.rows()), M = static_cast<int>(H.cols());
    if (K > M) throw Error(Errc::UnsupportedShape, "SVD factorization needs K <= M");
    Eigen::JacobiSVD<CMatrix> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdFactors f;
    f.S = svd.matrixU();
    f.D = svd.matrixV().adjoint();
    f.singular_values = svd.singularValues();
    f.V = RMatrix::Zero(K, M);
    for (int i = 0; i < K; ++i) f.V(i, i) = f.singular_values(i);
    // largest-magnitude entry of each left singular vector made real-positive
    for (int i = 0; i < K; ++i) {
        Eigen::Index m = 0;
        f.S.col(i).cwiseAbs().maxCoeff(&m);
        const cplx ph = std::polar(1.0, std::arg(f.S(m, i)));
        f.S.col(i) *= std::conj(ph);
        f.D.row(i) *= ph;
    }
    return f;
}

EigenPairs hermitian_eig(const CMatrix& A) {
    if (A.rows() != A.cols()) throw Error(Errc::InvalidArgument, "matrix must be square");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw Error(Errc::InvalidArgument, "matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(A);
    if (es.info() != Eigen::Success) throw Error(Errc::SolverFailure, "eigensolver failed");
    const Eigen::Index n = A.rows();
    EigenPairs out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        CVector v = es.eigenvectors().col(n - 1 - i);
        Eigen::Index m = 0;
        v.cwiseAbs().maxCoeff(&m);
        v *= std::polar(1.0, -std::arg(v(m)));
        out.vectors.col(i) = v;
    }
    return out;
}

namespace {

template <class Mat>
double cond_of(const Mat& A) {
    if (A.size() == 0) return 1.0;
    Eigen::JacobiSVD<Mat> svd(A);
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1), smax = s(0);
    if (smax == 0.0) return std::numeric_limits<double>::infinity();
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace

double condition_number(const RMatrix& A) { return cond_of(A); }
double condition_number(const CMatrix& A) { return cond_of(A); }

RVector solve_real_linear(const RMatrix& A, const RVector& b) {
    if (A.rows() != A.cols()) throw Error(Errc::InvalidArgument, "system matrix must be square");
    if (b.size() != A.rows()) throw Error(Errc::DimensionMismatch, "right-hand side length");
    const double c = condition_number(A);
    if (!(c <= kMaxCondition))
        throw Error(Errc::IllConditioned, "linear system is ill-conditioned (cond ~ " +
                                              std::to_string(c) + ")",
                    c);
    return A.colPivHouseholderQr().solve(b);
}

BisectResult bisect(const std::function<Probe(double)>& probe, double lo, double hi,
                    double tol) {
    if (!(hi >= lo) || !(tol > 0.0)) throw Error(Errc::InvalidArgument, "bad bisection bracket");
    BisectResult r;
    r.iterations = 1;
    const Probe p0 = probe(lo);
    if (!p0.feasible) throw Error(Errc::Infeasible, "predicate infeasible at the lower bracket");
    if (p0.converged) {
        r.t = r.lo = r.hi = lo;
        return r;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        ++r.iterations;
        const Probe p = probe(mid);
        if (p.converged) {
            r.t = mid;
            r.lo = p.feasible ? mid : lo;
            r.hi = p.feasible ? hi : mid;
            return r;
        }
        if (p.feasible)
            lo = mid;
        else
            hi = mid;
    }
    r.t = lo;
    r.lo = lo;
    r.hi = hi;
    return r;
}

RVector project_simplex(const RVector& v, double s) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        css += u[i];
        const double t = (css - s) / static_cast<double>(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    return (v.array() - theta).max(0.0).matrix();
}

RateAllocation maximize_log_rates(const RMatrix& A, const RVector& w, double budget) {
    const Eigen::Index K = A.rows(), n = A.cols();
    if (w.size() != K) throw Error(Errc::DimensionMismatch, "weights length");
    if (!(budget > 0.0)) throw Error(Errc::InvalidArgument, "budget must be > 0");
    if ((A.array() < 0).any()) throw Error(Errc::InvalidArgument, "gains must be nonnegative");
    const double ln2 = std::log(2.0);
    auto value = [&](const RVector& p) {
        const RVector s = A * p;
        double f = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) f += w(k) * std::log1p(s(k)) / ln2;
        return f;
    };
    auto gradient = [&](const RVector& p) {
        const RVector s = A * p;
        RVector c(K);
        for (Eigen::Index k = 0; k < K; ++k) c(k) = w(k) / (ln2 * (1.0 + s(k)));
        return RVector(A.transpose() * c);
    };

    RateAllocation out;
    RVector p = RVector::Constant(n, budget / static_cast<double>(n));
    double f = value(p);
    double step = 1.0;
    {
        const double gmax = gradient(p).cwiseAbs().maxCoeff();
        if (gmax > 0) step = budget / gmax;
    }
    for (int it = 0; it < 100000; ++it) {
        const RVector g = gradient(p);
        const double gap = budget * std::max(g.maxCoeff(), 0.0) - g.dot(p);
        out.gap = gap;
        out.iterations = it;
        if (gap <= 1e-12 * std::max(1.0, std::abs(f))) break;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const RVector q = project_simplex(p + step * g, budget);
            const double fq = value(q);
            if (fq >= f + 1e-4 * g.dot(q - p)) {
                moved = (q - p).norm() > 0;
                p = q;
                f = fq;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    out.p = p;
    out.value = f;
    return out;
}

}  // namespace cip
