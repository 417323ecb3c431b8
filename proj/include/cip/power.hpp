#pragma once

#include "cip/types.hpp"

namespace cip {

struct SnrTargets {
    RVector zeta;
    double sigma2 = 1.0;
};

struct CipmSolution {
    TransmitVector x;
    CVector nu;  // x = sum_j nu_j h_j^H
    double power = 0.0;
    CVector per_user_rx;
    double condition = 0.0;
};

// min ||x||^2 s.t. h_j x = sigma sqrt(zeta_j) d_j for every user
CipmSolution cipm_solve(const ChannelMatrix& H, const SymbolVector& d, const SnrTargets& t);

// Convenience: sigma2 taken from the channel.
CipmSolution cipm_solve(const ChannelMatrix& H, const SymbolVector& d, const RVector& zeta);

ChannelMatrix equivalent_multicast_channel(const ChannelMatrix& H, const SymbolVector& d,
                                           const PskSymbol& d_common);

struct CimmSolution {
    TransmitVector q;
    double t_star = 0.0;
    int iterations = 0;
    CVector per_user_rx;
};

// delta <= 0 selects the default 1e-6 * P
CimmSolution cimm_solve(const ChannelMatrix& H, const SymbolVector& d, const RVector& r, double P,
                        double delta = -1.0);

}  // namespace cip
