#include "cip/sumrate.hpp"
#include "cip/bounds.hpp"
#include "cip/linalg.hpp"
#include "cip/model.hpp"
#include "cip/power.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cip {

double q_inverse(double p) {
    if (!(p > 0.0 && p < 0.5)) throw Error(Errc::InvalidArgument, "Q^{-1} needs 0 < p < 0.5");
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(mid / std::sqrt(2.0)) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double psk_snr_threshold(int order, double ser) {
    if (!valid_psk_order(order)) throw Error(Errc::InvalidArgument, "invalid PSK order");
    const double x = q_inverse(ser / 2.0) / std::sin(kPi / order);
    return 0.5 * x * x;
}

McsTable default_mcs_table(double ser_target, const std::vector<int>& orders) {
    if (!(ser_target > 0.0 && ser_target < 1.0))
        throw Error(Errc::InvalidArgument, "SER target must lie in (0, 1)");
    McsTable t;
    t.ser_target = ser_target;
    for (int o : orders) t.thresholds.emplace_back(o, psk_snr_threshold(o, ser_target));
    std::sort(t.thresholds.begin(), t.thresholds.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    return t;
}

int select_mcs(double snr, const McsTable& table) {
    int order = 0;
    for (const auto& [o, th] : table.thresholds)
        if (snr >= th) order = std::max(order, o);
    return order;
}

void evaluate_sum_rate(const ChannelMatrix& H, const SymbolVector& d, const RVector& weights,
                       const std::vector<int>& eligible, SumRateSolution& s) {
    const int K = H.K();
    const CVector y = H.H() * s.q.x;
    s.per_user_snr = y.cwiseAbs2() / H.sigma2();
    s.served.clear();
    s.weighted_sum_rate = 0.0;
    for (int j : eligible) {
        const int o = s.per_user_order[j];
        if (o == 0 || y(j) == cplx(0.0, 0.0)) continue;
        if (!detect_psk(y(j), o, d[j]).correct) continue;
        s.served.push_back(j);
        s.weighted_sum_rate += weights(j) * std::log2(1.0 + s.per_user_snr(j));
    }
    std::sort(s.served.begin(), s.served.end());
    (void)K;
}

namespace {

void check_inputs(const ChannelMatrix& H, const SymbolVector& d, double P, const RVector& w) {
    if (static_cast<int>(d.size()) != H.K() || w.size() != H.K())
        throw Error(Errc::DimensionMismatch, "symbols and weights must have K entries");
    if (!(P > 0.0)) throw Error(Errc::InvalidArgument, "power budget must be > 0");
    if (!(H.sigma2() > 0.0)) throw Error(Errc::InvalidArgument, "sum rate needs sigma2 > 0");
    if ((w.array() < 0).any()) throw Error(Errc::InvalidArgument, "weights must be >= 0");
}

// least squares over phases theta: sum_j wrap(arg(sum_i c_ji e^{i theta_i}) - arg d_j)^2
double align_phases(const CMatrix& C, const CVector& target, int restarts, uint64_t seed,
                    RVector& theta_out) {
    const Eigen::Index n = C.rows(), m = C.cols();
    auto residual = [&](const RVector& th, RVector& r, RMatrix* J) {
        CVector e(m);
        for (Eigen::Index i = 0; i < m; ++i) e(i) = std::polar(1.0, th(i));
        const CVector z = C * e;
        for (Eigen::Index j = 0; j < n; ++j) {
            r(j) = z(j) == cplx(0.0, 0.0) ? kPi : std::arg(z(j) * std::conj(target(j)));
            if (J)
                for (Eigen::Index i = 0; i < m; ++i)
                    (*J)(j, i) = z(j) == cplx(0.0, 0.0) ? 0.0 : (C(j, i) * e(i) / z(j)).real();
        }
        return r.squaredNorm();
    };

    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    RVector r(n), rn(n);
    RMatrix J(n, m);
    for (int s = 0; s < std::max(restarts, 1); ++s) {
        RVector th(m);
        for (Eigen::Index i = 0; i < m; ++i) th(i) = s == 0 ? 0.0 : 2.0 * kPi * rng.uniform();
        double f = residual(th, r, &J);
        double lm = 1e-3;
        for (int it = 0; it < 100 && f > 1e-28; ++it) {
            const RMatrix JtJ = J.transpose() * J;
            const RVector g = J.transpose() * r;
            bool improved = false;
            for (int ls = 0; ls < 30; ++ls) {
                RMatrix A = JtJ;
                A.diagonal().array() += lm * (1.0 + JtJ.diagonal().array());
                const RVector step = A.ldlt().solve(-g);
                const RVector tn = th + step;
                const double fn = residual(tn, rn, nullptr);
                if (fn < f) {
                    th = tn;
                    f = residual(th, r, &J);
                    lm = std::max(lm * 0.3, 1e-12);
                    improved = true;
                    break;
                }
                lm *= 10.0;
            }
            if (!improved) break;
        }
        if (f < best) {
            best = f;
            theta_out = th;
        }
    }
    return std::sqrt(best);
}

}  // namespace

SumRateSolution cisr_pa(const ChannelMatrix& H, const SymbolVector& d, double P,
                        const RVector& weights, const SumRateOptions& opt) {
    check_inputs(H, d, P, weights);
    const int K = H.K(), M = H.M();
    if (K > M) throw Error(Errc::UnsupportedShape, "CISR-PA needs K <= M");
    const double s2 = H.sigma2();

    const EigenPairs ep = hermitian_eig(H.H().adjoint() * H.H());
    const CMatrix E = ep.vectors.leftCols(K);
    const CMatrix HE = H.H() * E;  // (h_j e_i)
    const RMatrix A = HE.cwiseAbs2() / s2;

    SumRateSolution s;
    s.tag = 'P';
    const RateAllocation ra = maximize_log_rates(A, weights, P);
    s.allocation = ra.p;
    const RVector predicted = A * ra.p;
    s.per_user_order.assign(K, 0);
    std::vector<int> active;
    for (int j = 0; j < K; ++j) {
        s.per_user_order[j] = select_mcs(predicted(j), opt.table);
        if (s.per_user_order[j] > 0) active.push_back(j);
    }
    // align the users that will be served; all of them if nobody qualifies
    if (active.empty())
        for (int j = 0; j < K; ++j) active.push_back(j);

    CMatrix C(active.size(), K);
    CVector target(active.size());
    for (size_t r = 0; r < active.size(); ++r) {
        for (int i = 0; i < K; ++i) C(r, i) = HE(active[r], i) * std::sqrt(ra.p(i));
        target(r) = d[active[r]].value;
    }
    RVector theta = RVector::Zero(K);
    s.alignment_residual = align_phases(C, target, opt.phase_restarts, opt.seed, theta);

    CVector q = CVector::Zero(M);
    for (int i = 0; i < K; ++i) q += std::sqrt(ra.p(i)) * std::polar(1.0, theta(i)) * E.col(i);
    const double n2 = q.squaredNorm();
    if (!(n2 > 0)) throw Error(Errc::SolverFailure, "CISR-PA produced a zero vector");
    s.q = TransmitVector(q * std::sqrt(P / n2));
    if (s.alignment_residual > 1e-6) s.note = "phase alignment inexact";

    std::vector<int> all(K);
    for (int j = 0; j < K; ++j) all[j] = j;
    evaluate_sum_rate(H, d, weights, all, s);
    return s;
}

std::vector<std::vector<int>> rank_subsets(const CVector& g, const std::vector<int>& candidates) {
    const int n = static_cast<int>(candidates.size());
    if (n > 20) throw Error(Errc::InvalidArgument, "too many users for subset enumeration");
    std::vector<std::pair<double, std::vector<int>>> all;
    all.reserve((1u << n) - 1);
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> sub;
        cplx lam = 0.0;
        for (int b = 0; b < n; ++b)
            if (mask & (1u << b)) {
                sub.push_back(candidates[b]);
                lam += g(candidates[b]);
            }
        std::sort(sub.begin(), sub.end());
        all.emplace_back(std::norm(lam), std::move(sub));
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::vector<int>> out;
    out.reserve(all.size());
    for (auto& e : all) out.push_back(std::move(e.second));
    return out;
}

SumRateSolution cisr_g(const ChannelMatrix& H, const SymbolVector& d, double P,
                       const RVector& weights, const SumRateOptions& opt) {
    check_inputs(H, d, P, weights);
    const int K = H.K();
    if (K > 12) throw Error(Errc::UnsupportedShape, "CISR-G enumerates subsets; needs K <= 12");
    const double s2 = H.sigma2();

    const BoundResult mc = multicast_max_sumrate(H, P, weights);
    const CVector phi = hermitian_eig(mc.Q).vectors.col(0);
    const CVector g = H.H() * phi;
    Eigen::Index jstar = 0;
    g.cwiseAbs2().maxCoeff(&jstar);
    const double gstar = std::norm(g(jstar));

    std::vector<int> orders(K, 0), candidates;
    for (int j = 0; j < K; ++j) {
        orders[j] = select_mcs(P * std::norm(g(j)) / s2, opt.table);
        if (orders[j] > 0) candidates.push_back(j);
    }

    // single-user base case: matched filter at full power towards j*
    SumRateSolution single;
    single.tag = 'G';
    single.per_user_order = orders;
    {
        const CRow h = H.H().row(jstar);
        single.q = TransmitVector(CVector(h.adjoint() / h.norm() * std::sqrt(P) *
                                          d[jstar].value));
        single.subset = {static_cast<int>(jstar)};
        evaluate_sum_rate(H, d, weights, single.subset, single);
    }
    if (candidates.empty()) {
        single.note = "no user qualifies for service";
        return single;
    }

    SumRateSolution best;
    bool found = false;
    for (const auto& sub : rank_subsets(g, candidates)) {
        const int n = static_cast<int>(sub.size());
        RVector rate(n);
        for (int i = 0; i < n; ++i) {
            const double gg = std::norm(g(sub[i]));
            rate(i) = opt.iota == IotaRule::Verbatim ? std::log2(gg) : std::log2(1.0 + P * gg / s2);
        }
        const double total = rate.sum();
        if (!(std::abs(total) > 0) || !std::isfinite(total)) continue;
        RVector zeta(n);
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            const double iota = rate(i) / total;
            zeta(i) = std::min(std::norm(g(sub[i])), iota * gstar);
            if (!(zeta(i) > 0)) ok = false;
        }
        if (!ok) continue;
        const ChannelMatrix Hs = H.with_rows(sub);
        SymbolVector ds;
        for (int j : sub) ds.push_back(d[j]);
        CVector x;
        try {
            x = cipm_solve(Hs, ds, zeta).x.x;
        } catch (const Error& e) {
            if (e.code() != Errc::IllConditioned && e.code() != Errc::UnsupportedShape) throw;
            // co-linear members: accept a consistent minimum-norm least-squares solution
            CVector y(n);
            for (int i = 0; i < n; ++i) y(i) = std::sqrt(s2 * zeta(i)) * ds[i].value;
            x = Hs.H().completeOrthogonalDecomposition().solve(y);
            if ((Hs.H() * x - y).norm() > 1e-8 * y.norm()) continue;
        }
        const double n2 = x.squaredNorm();
        if (!(n2 > 0)) continue;
        best.tag = 'G';
        best.per_user_order = orders;
        best.q = TransmitVector(CVector(x * std::sqrt(P / n2)));
        best.subset = sub;
        evaluate_sum_rate(H, d, weights, sub, best);
        found = true;
        break;
    }
    if (!found || single.weighted_sum_rate > best.weighted_sum_rate) {
        single.note = found ? "single best user beats the selected subset"
                            : "no subset admitted a precoder";
        return single;
    }
    return best;
}

}  // namespace cip
