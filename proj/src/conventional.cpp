#include "cip/precoders.hpp"

#include <cmath>

namespace cip {

namespace {

void normalize_columns(CMatrix& W) {
    for (Eigen::Index k = 0; k < W.cols(); ++k) {
        const double n = W.col(k).norm();
        if (n > 0) W.col(k) /= n;
    }
}

}  // namespace

RVector equal_powers(int K, double P) { return RVector::Constant(K, P / K); }

LinearPrecoder zf_precoder(const ChannelMatrix& H) {
    const CMatrix gram = H.H() * H.H().adjoint();
    const double c = condition_number(gram);
    if (!(c <= kMaxGramCondition))
        throw Error(Errc::SingularChannel, "co-linear user channels: zero forcing undefined", c);
    LinearPrecoder out;
    out.W = H.H().adjoint() * gram.ldlt().solve(CMatrix::Identity(H.K(), H.K()));
    normalize_columns(out.W);
    out.powers = RVector::Ones(H.K());
    return out;
}

LinearPrecoder mmse_precoder(const ChannelMatrix& H, double sigma2, double P) {
    if (!(sigma2 > 0.0) || !(P > 0.0))
        throw Error(Errc::InvalidArgument, "MMSE needs sigma2 > 0 and P > 0");
    const int K = H.K();
    CMatrix reg = H.H() * H.H().adjoint();
    reg.diagonal().array() += sigma2 * K / P;
    LinearPrecoder out;
    out.W = H.H().adjoint() * reg.ldlt().solve(CMatrix::Identity(K, K));
    normalize_columns(out.W);
    out.powers = RVector::Ones(K);
    return out;
}

LinearPrecoder nmrt_precoder(const ChannelMatrix& H) {
    LinearPrecoder out;
    out.W = H.H().adjoint();
    for (int k = 0; k < H.K(); ++k) {
        const double n = out.W.col(k).norm();
        if (n == 0.0) throw Error(Errc::DegenerateChannel, "zero-norm channel row");
        out.W.col(k) /= n;
    }
    out.powers = RVector::Ones(H.K());
    return out;
}

RVector conventional_sinr(const ChannelMatrix& H, const LinearPrecoder& W, double sigma2) {
    const int K = H.K();
    if (W.W.rows() != H.M() || W.W.cols() != K || W.powers.size() != K)
        throw Error(Errc::DimensionMismatch, "precoder does not match the channel");
    const CMatrix E = H.H() * W.W;
    RVector g(K);
    for (int j = 0; j < K; ++j) {
        double interf = 0.0;
        for (int i = 0; i < K; ++i)
            if (i != j) interf += W.powers(i) * std::norm(E(j, i));
        g(j) = W.powers(j) * std::norm(E(j, j)) / (interf + sigma2);
    }
    return g;
}

CVector linear_transmit(const LinearPrecoder& W, const SymbolVector& d) {
    if (static_cast<Eigen::Index>(d.size()) != W.W.cols())
        throw Error(Errc::DimensionMismatch, "symbol count differs from precoder columns");
    CVector s(d.size());
    for (size_t k = 0; k < d.size(); ++k) s(k) = std::sqrt(W.powers(k)) * d[k].value;
    return W.W * s;
}

}  // namespace cip
