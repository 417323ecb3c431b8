#pragma once

#include "cip/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cip {

struct McsTable {
    std::vector<std::pair<int, double>> thresholds;  // (order, min linear SNR), ascending
    double ser_target = 1e-3;
};

// Q^{-1} by bisection on erfc
double q_inverse(double p);
// Linear SNR at which 2 Q(sqrt(2 snr) sin(pi/order)) equals ser
double psk_snr_threshold(int order, double ser);
McsTable default_mcs_table(double ser_target = 1e-3, const std::vector<int>& orders = {2, 4, 8, 16});

// 0 means no service
int select_mcs(double snr, const McsTable& table);

enum class IotaRule { Clamped, Verbatim };

struct SumRateOptions {
    McsTable table = default_mcs_table();
    IotaRule iota = IotaRule::Clamped;
    int phase_restarts = 16;
    uint64_t seed = 0x5eed;
};

struct SumRateSolution {
    TransmitVector q;
    std::vector<int> served;
    RVector per_user_snr;
    std::vector<int> per_user_order;
    double weighted_sum_rate = 0.0;
    char tag = 'P';  // 'P' or 'G'
    double alignment_residual = 0.0;
    std::vector<int> subset;
    RVector allocation;
    std::string note;
};

SumRateSolution cisr_pa(const ChannelMatrix& H, const SymbolVector& d, double P,
                        const RVector& weights, const SumRateOptions& opt = {});

// Nonempty subsets of `candidates` ranked by |sum_{j in S} g_j|^2, descending;
// ties go to the lexicographically smallest subset.
std::vector<std::vector<int>> rank_subsets(const CVector& g, const std::vector<int>& candidates);

SumRateSolution cisr_g(const ChannelMatrix& H, const SymbolVector& d, double P,
                       const RVector& weights, const SumRateOptions& opt = {});

// Evaluates q on the channel: SNRs, served set (assigned order and correct
// noiseless detection), weighted rate.
void evaluate_sum_rate(const ChannelMatrix& H, const SymbolVector& d, const RVector& weights,
                       const std::vector<int>& eligible, SumRateSolution& s);

}  // namespace cip
