#include "cip/model.hpp"
#include "rng.hpp"

#include <cmath>

namespace cip {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::InvalidArgument: return "invalid-argument";
    case Errc::DimensionMismatch: return "dimension-mismatch";
    case Errc::DegenerateChannel: return "degenerate-channel";
    case Errc::SingularChannel: return "singular-channel";
    case Errc::IllConditioned: return "ill-conditioned";
    case Errc::Infeasible: return "infeasible";
    case Errc::SolverFailure: return "solver-failure";
    case Errc::UnsupportedShape: return "unsupported-shape";
    case Errc::RotationInfeasible: return "rotation-infeasible";
    case Errc::AmbiguousDetection: return "ambiguous-detection";
    case Errc::Config: return "config";
    case Errc::Io: return "io";
    }
    return "unknown";
}

ChannelMatrix::ChannelMatrix(CMatrix h, double sigma2_noise)
    : h_(std::move(h)), sigma2_(sigma2_noise) {
    if (h_.rows() < 1 || h_.cols() < 1)
        throw Error(Errc::InvalidArgument, "channel needs K >= 1 and M >= 1");
    if (!h_.allFinite())
        throw Error(Errc::InvalidArgument, "channel entries must be finite");
    if (!(sigma2_ >= 0.0) || !std::isfinite(sigma2_))
        throw Error(Errc::InvalidArgument, "noise variance must be finite and >= 0");
}

ChannelMatrix ChannelMatrix::with_rows(const std::vector<int>& rows) const {
    CMatrix sub(rows.size(), h_.cols());
    for (size_t i = 0; i < rows.size(); ++i) sub.row(i) = h_.row(rows[i]);
    return ChannelMatrix(std::move(sub), sigma2_);
}

double psk_offset(int order, PskOffset rule) {
    return rule == PskOffset::HalfStep ? kPi / order : 0.0;
}

CVector symbol_values(const SymbolVector& d) {
    CVector v(d.size());
    for (size_t i = 0; i < d.size(); ++i) v(i) = d[i].value;
    return v;
}

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t stream_seed(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    uint64_t s = mix64(seed);
    s = mix64(s ^ a);
    s = mix64(s ^ (b + 0x632be59bd9b4e019ULL));
    s = mix64(s ^ (c + 0x85157af5ULL));
    return s;
}

ChannelMatrix generate_channel(int K, int M, double sigma2_h, uint64_t seed,
                               double sigma2_noise) {
    if (K < 1 || M < 1) throw Error(Errc::InvalidArgument, "K and M must be >= 1");
    if (!(sigma2_h > 0.0)) throw Error(Errc::InvalidArgument, "channel variance must be > 0");
    Rng rng(seed);
    CMatrix h(K, M);
    const double s = std::sqrt(sigma2_h);
    for (int j = 0; j < K; ++j)
        for (int m = 0; m < M; ++m) h(j, m) = s * rng.cgauss();
    return ChannelMatrix(std::move(h), sigma2_noise);
}

bool valid_psk_order(int order) {
    return order >= 2 && order <= (1 << 20) && (order & (order - 1)) == 0;
}

PskSymbol psk_point(int order, int index, PskOffset rule) {
    if (!valid_psk_order(order))
        throw Error(Errc::InvalidArgument, "PSK order must be a power of two >= 2");
    if (index < 0 || index >= order)
        throw Error(Errc::InvalidArgument, "PSK index out of range");
    PskSymbol s;
    s.order = order;
    s.index = index;
    s.rule = rule;
    s.value = std::polar(1.0, 2.0 * kPi * index / order + psk_offset(order, rule));
    return s;
}

SymbolVector random_symbols(int K, int order, uint64_t seed, PskOffset rule) {
    Rng rng(seed);
    SymbolVector d;
    d.reserve(K);
    for (int j = 0; j < K; ++j) d.push_back(psk_point(order, rng.below(order), rule));
    return d;
}

cplx cross_correlation(const ChannelMatrix& H, int j, int k) {
    if (j < 0 || k < 0 || j >= H.K() || k >= H.K())
        throw Error(Errc::InvalidArgument, "user index out of range");
    const double nj = H.H().row(j).norm(), nk = H.H().row(k).norm();
    if (nj == 0.0 || nk == 0.0)
        throw Error(Errc::DegenerateChannel, "zero-norm channel row");
    // h_j h_k^H; Eigen's dot conjugates its left operand
    const cplx ip = H.H().row(k).dot(H.H().row(j));
    return ip / (nj * nk);
}

cplx interference_factor(const CRow& h_j, const CVector& w_k) {
    if (h_j.size() != w_k.size())
        throw Error(Errc::DimensionMismatch, "row and column lengths differ");
    const double a = h_j.norm(), b = w_k.norm();
    if (a == 0.0 || b == 0.0) throw Error(Errc::DegenerateChannel, "zero-norm input");
    return (h_j * w_k)(0) / (a * b);
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

namespace {

// reduce to [-pi/2, pi/2)
double wrap_half(double a) {
    a = std::remainder(a, kPi);
    if (a >= kPi / 2) a -= kPi;
    return a;
}

}  // namespace

InterferenceReport classify_interference(const PskSymbol& d_j, const PskSymbol& d_k,
                                         cplx psi_jk) {
    if (d_j.order != d_k.order)
        throw Error(Errc::InvalidArgument, "symbols must share one constellation order");
    InterferenceReport rep;
    rep.psi = psi_jk;
    const double half = kPi / d_j.order;
    const cplx u = psi_jk * d_k.value;
    if (u == cplx(0.0, 0.0)) {
        rep.constructive = true;
        rep.angle_margin = half;
        return rep;
    }
    // tangent window first (defined modulo pi), then the quadrant signs pick the branch
    const double t = u.real() != 0.0 ? std::atan(u.imag() / u.real())
                                     : (u.imag() > 0 ? kPi / 2 : -kPi / 2);
    const double off = wrap_half(t - d_j.angle());
    bool ok = off >= -half && off < half;
    constexpr double eps = 1e-12;
    if (std::abs(d_j.value.real()) > eps) ok = ok && d_j.value.real() * u.real() > 0.0;
    if (std::abs(d_j.value.imag()) > eps) ok = ok && d_j.value.imag() * u.imag() > 0.0;
    rep.constructive = ok;
    rep.angle_margin = half - std::abs(wrap_angle(std::arg(u) - d_j.angle()));
    return rep;
}

CVector received_signal(const ChannelMatrix& H, const TransmitVector& x, const CVector* noise) {
    if (x.x.size() != H.M())
        throw Error(Errc::DimensionMismatch, "transmit vector length differs from M");
    CVector y = H.H() * x.x;
    if (noise) {
        if (noise->size() != H.K())
            throw Error(Errc::DimensionMismatch, "noise length differs from K");
        y += *noise;
    }
    return y;
}

RVector ci_snr(const ChannelMatrix& H, const TransmitVector& x) {
    if (!(H.sigma2() > 0.0)) throw Error(Errc::InvalidArgument, "SNR needs sigma2 > 0");
    const CVector y = received_signal(H, x);
    return y.cwiseAbs2() / H.sigma2();
}

int detect_index(cplx y, int order, PskOffset rule) {
    if (!valid_psk_order(order))
        throw Error(Errc::InvalidArgument, "PSK order must be a power of two >= 2");
    if (y == cplx(0.0, 0.0))
        throw Error(Errc::AmbiguousDetection, "cannot demap a zero sample");
    const double step = 2.0 * kPi / order;
    double a = std::fmod(std::arg(y) - psk_offset(order, rule), 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    const int idx = static_cast<int>(std::floor((a + step / 2) / step));
    return idx % order;
}

Detection detect_psk(cplx y, int order, const PskSymbol& reference) {
    Detection det;
    det.index = detect_index(y, order, reference.rule);
    const int want = reference.order == order
                         ? reference.index
                         : detect_index(reference.value, order, reference.rule);
    det.correct = det.index == want;
    return det;
}

}  // namespace cip
