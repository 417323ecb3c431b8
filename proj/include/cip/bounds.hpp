#pragma once

#include "cip/linalg.hpp"
#include "cip/types.hpp"

#include <string>

namespace cip {

enum class BoundKind { GeniePower, MulticastPower, MulticastPowerRank1, MulticastSumRate, GenieSumRate };

const char* bound_kind_name(BoundKind k);

struct BoundResult {
    BoundKind kind = BoundKind::GeniePower;
    double value = 0.0;
    std::string certificate;
    RVector powers;  // genie allocations
    CMatrix Q;       // covariance, when one exists
};

// min sum p s.t. ||g_k||^2 (|xi_kk|^2 p_k + sum_{j!=k} |xi_kj|^2 p_j) >= zeta_k
BoundResult genie_min_power(const RVector& g_norms, const CMatrix& xi, const RVector& zeta);

// Convenience on a channel: builds ||g_k||, xi from the nMRT factorization and
// uses sigma2 * zeta as the receive targets.
BoundResult genie_min_power(const ChannelMatrix& H, const RVector& zeta);

// Targets are sigma2 * zeta so the value is comparable with CIPM power.
BoundResult multicast_min_power(const ChannelMatrix& H, const RVector& zeta);
BoundResult multicast_min_power_rank1(const ChannelMatrix& H, const RVector& zeta, int samples,
                                      uint64_t seed);

BoundResult multicast_max_sumrate(const ChannelMatrix& H, double P, const RVector& weights);

// max sum_k log2(1 + ||g_k||^2 (|xi_kk|^2 p_k + sum |xi_kj|^2 p_j)) over the simplex
BoundResult genie_sumrate(const RVector& g_norms, const CMatrix& xi, double P);

// Channel convenience; gains divided by sigma2.
BoundResult genie_sumrate(const ChannelMatrix& H, double P);

}  // namespace cip
