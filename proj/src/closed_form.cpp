#include "cip/model.hpp"
#include "cip/precoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cip {

const char* plane_status_name(PlaneStatus s) {
    switch (s) {
    case PlaneStatus::Rotated: return "rotated";
    case PlaneStatus::Reduced: return "reduced";
    case PlaneStatus::Skipped: return "skipped";
    }
    return "?";
}

namespace {

void check_symbols(const ChannelMatrix& H, const SymbolVector& d) {
    if (static_cast<int>(d.size()) != H.K())
        throw Error(Errc::DimensionMismatch, "symbol vector length differs from K");
}

}  // namespace

CMatrix rotation_matrix_phi(const ChannelMatrix& H, const SymbolVector& d) {
    check_symbols(H, d);
    const int K = H.K();
    CMatrix R = CMatrix::Identity(K, K);
    for (int j = 0; j < K; ++j)
        for (int k = 0; k < K; ++k) {
            if (j == k) continue;
            const cplx rho = cross_correlation(H, j, k);
            if (rho == cplx(0.0, 0.0)) {
                R(j, k) = 0.0;
                continue;
            }
            const double phi = d[j].angle() - std::arg(rho * d[k].value);
            R(j, k) = rho * std::polar(1.0, phi);
        }
    return R;
}

CiPrecoderOutput cizf_precoder(const ChannelMatrix& H, const SymbolVector& d, double P) {
    check_symbols(H, d);
    if (!(P > 0.0)) throw Error(Errc::InvalidArgument, "power budget must be > 0");
    const int K = H.K();
    const CMatrix gram = H.H() * H.H().adjoint();
    const double c = condition_number(gram);
    if (!(c <= kMaxGramCondition))
        throw Error(Errc::SingularChannel, "co-linear user channels: CIZF undefined", c);
    const CMatrix R = rotation_matrix_phi(H, d);
    CMatrix W = H.H().adjoint() * gram.ldlt().solve(CMatrix::Identity(K, K)) * R;
    const CVector x0 = W * symbol_values(d);
    const double n2 = x0.squaredNorm();
    if (!(n2 > 0.0)) throw Error(Errc::SingularChannel, "CIZF output vanished");
    CiPrecoderOutput out;
    out.gamma = std::sqrt(P / n2);
    out.W = out.gamma * W;
    out.x = TransmitVector(out.gamma * x0);
    out.noiseless_rx = H.H() * out.x.x;
    return out;
}

CMatrix CimrtState::xi() const {
    CMatrix X = G * B;
    for (Eigen::Index k = 0; k < X.rows(); ++k)
        if (g_norms(k) > 0) X.row(k) /= g_norms(k);
    return X;
}

CimrtState cimrt_init(const ChannelMatrix& H) {
    CimrtState st;
    st.factors = svd_decompose(H);
    const CMatrix Wm = nmrt_precoder(H).W;
    st.Vp = st.factors.D * Wm * st.factors.S;
    st.G = st.factors.S * st.factors.V.cast<cplx>() * st.Vp;
    st.B = st.factors.S.adjoint();
    st.g_norms = st.G.rowwise().norm();
    return st;
}

void apply_plane_rotation(CMatrix& B, const SymbolVector& d, int k, int j, double alpha,
                          double delta) {
    const double c = std::cos(alpha), s = std::sin(alpha);
    const CVector bk = B.col(k) * d[k].value, bj = B.col(j) * d[j].value;
    const CVector nk = c * bk - s * std::polar(1.0, -delta) * bj;
    const CVector nj = s * std::polar(1.0, delta) * bk + c * bj;
    B.col(k) = nk / d[k].value;
    B.col(j) = nj / d[j].value;
}

namespace {

struct Score {
    int detected = -1;
    double worst = -std::numeric_limits<double>::infinity();

    bool better_than(const Score& o) const {
        if (detected != o.detected) return detected > o.detected;
        return worst > o.worst;
    }
};

Score score_candidate(const ChannelMatrix& H, const CMatrix& DV, const CMatrix& B,
                      const CVector& sd, const SymbolVector& d, const RVector& w) {
    const CVector x = DV * (B * sd);
    const double n2 = x.squaredNorm();
    Score sc;
    if (!(n2 > 0)) return sc;
    const CVector y = H.H() * x;
    sc.detected = 0;
    sc.worst = std::numeric_limits<double>::infinity();
    for (int u = 0; u < H.K(); ++u) {
        if (y(u) != cplx(0.0, 0.0) && detect_psk(y(u), d[u].order, d[u]).correct) ++sc.detected;
        sc.worst = std::min(sc.worst, std::norm(y(u)) / (w(u) * n2));
    }
    return sc;
}

}  // namespace

CimrtOutput cimrt_precoder(const ChannelMatrix& H, const SymbolVector& d, const RVector& powers,
                           double P, const CimrtOptions& opt) {
    check_symbols(H, d);
    const int K = H.K();
    if (powers.size() != K) throw Error(Errc::DimensionMismatch, "powers length differs from K");
    if ((powers.array() < 0).any() || !(powers.sum() > 0))
        throw Error(Errc::InvalidArgument, "powers must be nonnegative and not all zero");
    if (!(P > 0.0)) throw Error(Errc::InvalidArgument, "power budget must be > 0");
    RVector w = opt.target_weights.size() == K ? opt.target_weights : RVector::Ones(K);

    CimrtOutput out;
    CimrtState& st = out.state;
    st = cimrt_init(H);
    const CMatrix DV = st.factors.D.adjoint() * st.Vp;
    CVector sd(K);
    for (int k = 0; k < K; ++k) sd(k) = std::sqrt(powers(k)) * d[k].value;

    std::vector<std::pair<int, int>> planes;
    for (int j = 0; j < K; ++j)
        for (int k = j + 1; k < K; ++k) planes.emplace_back(k, j);
    if (opt.order == PlaneOrder::Reverse) std::reverse(planes.begin(), planes.end());

    for (const auto& [k, j] : planes) {
        PlaneRecord rec;
        rec.k = k;
        rec.j = j;
        const CMatrix X = st.xi();
        rec.xi_kk_before = X(k, k);
        rec.xi_jj_before = X(j, j);
        RotationResult rr;
        try {
            rr = solve_rotation_pair(X(k, k), X(k, j), X(j, k), X(j, j), d[k].value, d[j].value,
                                     -1.0, -1.0, opt.rotation);
        } catch (const Error& e) {
            if (e.code() != Errc::RotationInfeasible) throw;
            rec.note = e.what();
            rec.xi_kk_after = rec.xi_kk_before;
            rec.xi_jj_after = rec.xi_jj_before;
            st.planes.push_back(rec);
            continue;
        }
        // evaluate the identity and each alignment root on the actual receive
        Score best = score_candidate(H, DV, st.B, sd, d, w);
        int pick = -1;
        for (size_t r = 0; r < rr.roots.size(); ++r) {
            CMatrix Bc = st.B;
            apply_plane_rotation(Bc, d, k, j, rr.roots[r].alpha, rr.roots[r].delta);
            const Score sc = score_candidate(H, DV, Bc, sd, d, w);
            if (sc.better_than(best)) {
                best = sc;
                pick = static_cast<int>(r);
            }
        }
        if (pick < 0) {
            rec.note = "no rotation improved the received signals";
        } else {
            const RotationRoot& root = rr.roots[pick];
            apply_plane_rotation(st.B, d, k, j, root.alpha, root.delta);
            rec.alpha = root.alpha;
            rec.delta = root.delta;
            double level = 1.0;
            for (int n = 0; n < opt.rotation.max_retries && root.ratio < level * (1 - 1e-12); ++n)
                level *= opt.rotation.shrink;
            rec.reduction = level;
            rec.status = level < 1.0 ? PlaneStatus::Reduced : PlaneStatus::Rotated;
        }
        const CMatrix Xa = st.xi();
        rec.xi_kk_after = Xa(k, k);
        rec.xi_jj_after = Xa(j, j);
        st.planes.push_back(rec);
    }

    const CVector x0 = DV * (st.B * sd);
    const double n2 = x0.squaredNorm();
    if (!(n2 > 0.0)) throw Error(Errc::SolverFailure, "CIMRT output vanished");
    out.gamma = std::sqrt(P / n2);
    out.W = out.gamma * DV * st.B * powers.cwiseSqrt().cast<cplx>().asDiagonal();
    out.x = TransmitVector(out.gamma * x0);
    out.noiseless_rx = H.H() * out.x.x;
    out.angle_error.resize(K);
    for (int u = 0; u < K; ++u)
        out.angle_error(u) = wrap_angle(std::arg(out.noiseless_rx(u)) - d[u].angle());
    return out;
}

}  // namespace cip
