#include "cip/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cip {

namespace {

const cplx I1(0.0, 1.0);

// r1 = xi'_kk (should be real-positive), r2 = xi'_jj
struct PairEq {
    cplx A, B, C, D;

    void eval(double al, double de, cplx& r1, cplx& r2) const {
        const double c = std::cos(al), s = std::sin(al);
        const cplx em = std::polar(1.0, -de), ep = std::polar(1.0, de);
        r1 = A * c + B * s * em;
        r2 = C * s * ep + D * c;
    }

    void jac(double al, double de, double J[2][2]) const {
        const double c = std::cos(al), s = std::sin(al);
        const cplx em = std::polar(1.0, -de), ep = std::polar(1.0, de);
        J[0][0] = (-A * s + B * c * em).imag();
        J[0][1] = (-I1 * B * s * em).imag();
        J[1][0] = (C * c * ep - D * s).imag();
        J[1][1] = (I1 * C * s * ep).imag();
    }
};

double wrap_delta_diff(double a, double b) { return std::remainder(a - b, 2.0 * kPi); }

void normalize(double& al, double& de) {
    al = std::remainder(al, 2.0 * kPi);
    if (al < 0) {
        al = -al;
        de += kPi;
    }
    de = std::fmod(de, 2.0 * kPi);
    if (de < 0) de += 2.0 * kPi;
}

bool newton(const PairEq& eq, double scale, double& al, double& de) {
    cplx r1, r2;
    eq.eval(al, de, r1, r2);
    double f2 = r1.imag() * r1.imag() + r2.imag() * r2.imag();
    double lm = 1e-12;
    for (int it = 0; it < 200; ++it) {
        if (std::sqrt(f2) <= 1e-14 * scale) return true;
        double J[2][2];
        eq.jac(al, de, J);
        const double F0 = r1.imag(), F1 = r2.imag();
        // Levenberg-Marquardt step on the 2x2 system
        const double a = J[0][0] * J[0][0] + J[1][0] * J[1][0];
        const double b = J[0][0] * J[0][1] + J[1][0] * J[1][1];
        const double d = J[0][1] * J[0][1] + J[1][1] * J[1][1];
        const double g0 = J[0][0] * F0 + J[1][0] * F1;
        const double g1 = J[0][1] * F0 + J[1][1] * F1;
        bool improved = false;
        for (int ls = 0; ls < 40; ++ls) {
            const double damp = lm * std::max(a + d, 1e-300);
            const double aa = a + damp, dd = d + damp;
            const double det = aa * dd - b * b;
            if (det == 0.0) {
                lm *= 10;
                continue;
            }
            const double s0 = -(dd * g0 - b * g1) / det;
            const double s1 = -(-b * g0 + aa * g1) / det;
            const double na = al + s0, nd = de + s1;
            cplx q1, q2;
            eq.eval(na, nd, q1, q2);
            const double nf2 = q1.imag() * q1.imag() + q2.imag() * q2.imag();
            if (nf2 < f2) {
                al = na;
                de = nd;
                r1 = q1;
                r2 = q2;
                f2 = nf2;
                lm = std::max(lm * 0.1, 1e-15);
                improved = true;
                break;
            }
            lm *= 10;
        }
        if (!improved) break;
    }
    return std::sqrt(f2) <= 1e-12 * scale;
}

}  // namespace

double rotation_residual(cplx xi_kk, cplx xi_kj, cplx xi_jk, cplx xi_jj, cplx d_k,
                         cplx d_j, double alpha, double delta, double a_k, double a_j) {
    const double c = std::cos(alpha), s = std::sin(alpha);
    const cplx e1 = c * xi_kk * d_k - s * std::polar(1.0, -delta) * xi_kj * d_j - a_k * d_k;
    const cplx e2 = s * std::polar(1.0, delta) * xi_jk * d_k + c * xi_jj * d_j - a_j * d_j;
    return std::max(std::abs(e1), std::abs(e2));
}

RotationResult solve_rotation_pair(cplx xi_kk, cplx xi_kj, cplx xi_jk, cplx xi_jj, cplx d_k,
                                   cplx d_j, double target_k, double target_j,
                                   const RotationOptions& opt) {
    if (std::abs(d_k) == 0.0 || std::abs(d_j) == 0.0)
        throw Error(Errc::InvalidArgument, "symbols must be nonzero");
    if (!(opt.shrink > 0.0 && opt.shrink < 1.0) || opt.max_retries < 0)
        throw Error(Errc::InvalidArgument, "bad target reduction settings");
    const PairEq eq{xi_kk, -xi_kj * d_j / d_k, xi_jk * d_k / d_j, xi_jj};
    RotationResult res;
    res.target_k = target_k >= 0 ? target_k : std::hypot(std::abs(xi_kk), std::abs(xi_kj));
    res.target_j = target_j >= 0 ? target_j : std::hypot(std::abs(xi_jj), std::abs(xi_jk));
    const double scale =
        std::abs(eq.A) + std::abs(eq.B) + std::abs(eq.C) + std::abs(eq.D) + 1e-300;

    std::vector<RotationRoot> found;
    for (int ia = 0; ia < 4; ++ia)
        for (int id = 0; id < 2; ++id) {
            double al = ia * kPi / 4, de = id * kPi;
            if (!newton(eq, scale, al, de)) continue;
            normalize(al, de);
            cplx r1, r2;
            eq.eval(al, de, r1, r2);
            const double tiny = 1e-13 * scale;
            const bool need_k = res.target_k > 0, need_j = res.target_j > 0;
            if ((need_k && r1.real() <= tiny) || (need_j && r2.real() <= tiny)) continue;
            if (r1.real() < 0 || r2.real() < 0) continue;
            RotationRoot rt;
            rt.alpha = al;
            rt.delta = de;
            rt.achieved_k = r1.real();
            rt.achieved_j = r2.real();
            double ratio = 1e300;
            if (need_k) ratio = std::min(ratio, rt.achieved_k / res.target_k);
            if (need_j) ratio = std::min(ratio, rt.achieved_j / res.target_j);
            rt.ratio = need_k || need_j ? ratio : 1.0;
            bool dup = false;
            for (const auto& o : found) {
                const bool same_a = std::abs(o.alpha - rt.alpha) < 1e-7;
                const bool same_d = std::abs(wrap_delta_diff(o.delta, rt.delta)) < 1e-7 ||
                                    rt.alpha < 1e-9;
                if (same_a && same_d) dup = true;
            }
            if (!dup) found.push_back(rt);
        }

    std::sort(found.begin(), found.end(), [](const RotationRoot& a, const RotationRoot& b) {
        if (a.ratio != b.ratio) return a.ratio > b.ratio;
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.delta < b.delta;
    });
    const double floor_level = std::pow(opt.shrink, opt.max_retries);
    if (found.empty() || found.front().ratio < floor_level * (1 - 1e-12))
        throw Error(Errc::RotationInfeasible, "no rotation meets the reduced targets");

    const double best = found.front().ratio;
    double level = 1.0;
    int n = 0;
    while (best < level * (1 - 1e-12) && n < opt.max_retries) {
        level *= opt.shrink;
        ++n;
    }
    res.reduction = level;
    res.retries = n;
    res.root = found.front();
    for (const auto& r : found)
        if (r.ratio >= floor_level * (1 - 1e-12)) res.roots.push_back(r);
    res.residual = rotation_residual(xi_kk, xi_kj, xi_jk, xi_jj, d_k, d_j, res.root.alpha,
                                     res.root.delta, res.root.achieved_k, res.root.achieved_j);
    return res;
}

}  // namespace cip
