#pragma once

#include "cip/types.hpp"

#include <random>

namespace cip {

// splitmix64 step; used to derive independent per-(trial, slot) streams
uint64_t mix64(uint64_t x);
uint64_t stream_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

ChannelMatrix generate_channel(int K, int M, double sigma2_h, uint64_t seed,
                               double sigma2_noise = 1.0);

bool valid_psk_order(int order);
PskSymbol psk_point(int order, int index, PskOffset rule = PskOffset::Zero);
SymbolVector random_symbols(int K, int order, uint64_t seed,
                            PskOffset rule = PskOffset::Zero);

cplx cross_correlation(const ChannelMatrix& H, int j, int k);
cplx interference_factor(const CRow& h_j, const CVector& w_k);

InterferenceReport classify_interference(const PskSymbol& d_j, const PskSymbol& d_k,
                                         cplx psi_jk);

CVector received_signal(const ChannelMatrix& H, const TransmitVector& x,
                        const CVector* noise = nullptr);

RVector ci_snr(const ChannelMatrix& H, const TransmitVector& x);

struct Detection {
    int index = 0;
    bool correct = false;
};

// Demaps y at `order`; correct compares against the demapping of the
// reference symbol at the same order, so a high-order symbol can be
// checked at a lower order.
Detection detect_psk(cplx y, int order, const PskSymbol& reference);
int detect_index(cplx y, int order, PskOffset rule = PskOffset::Zero);

// Wraps to (-pi, pi].
double wrap_angle(double a);

}  // namespace cip
