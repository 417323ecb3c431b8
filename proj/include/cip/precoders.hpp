#pragma once

#include "cip/linalg.hpp"
#include "cip/types.hpp"

#include <string>

namespace cip {

// ---- conventional user-level precoders ----

struct LinearPrecoder {
    CMatrix W;      // M x K, unit-norm columns
    RVector powers;
};

LinearPrecoder zf_precoder(const ChannelMatrix& H);
LinearPrecoder mmse_precoder(const ChannelMatrix& H, double sigma2, double P);
LinearPrecoder nmrt_precoder(const ChannelMatrix& H);

RVector equal_powers(int K, double P);
RVector conventional_sinr(const ChannelMatrix& H, const LinearPrecoder& W, double sigma2);

// Symbol-slot output sum_j w_j sqrt(p_j) d_j
CVector linear_transmit(const LinearPrecoder& W, const SymbolVector& d);

// ---- closed-form constructive interference precoders ----

CMatrix rotation_matrix_phi(const ChannelMatrix& H, const SymbolVector& d);

struct CiPrecoderOutput {
    TransmitVector x;
    CMatrix W;
    double gamma = 0.0;  // CIZF normalization, or the CIMRT rescale factor
    CVector noiseless_rx;
};

inline constexpr double kMaxGramCondition = 1e10;

CiPrecoderOutput cizf_precoder(const ChannelMatrix& H, const SymbolVector& d, double P);

enum class PlaneOrder { Forward, Reverse };

struct CimrtOptions {
    PlaneOrder order = PlaneOrder::Forward;
    RotationOptions rotation;
    RVector target_weights;  // empty: equal
};

enum class PlaneStatus { Rotated, Reduced, Skipped };

struct PlaneRecord {
    int k = 0, j = 0;
    double alpha = 0.0, delta = 0.0;
    PlaneStatus status = PlaneStatus::Skipped;
    double reduction = 1.0;
    cplx xi_kk_before{}, xi_jj_before{}, xi_kk_after{}, xi_jj_after{};
    std::string note;
};

struct CimrtState {
    SvdFactors factors;
    CMatrix Vp;  // V' (M x K): D^H V' S^H = W_nMRT
    CMatrix G;   // S V V'
    CMatrix B;   // starts as S^H
    RVector g_norms;
    std::vector<PlaneRecord> planes;

    // xi_kj = g_k b_j / ||g_k||
    CMatrix xi() const;
};

struct CimrtOutput : CiPrecoderOutput {
    CimrtState state;
    RVector angle_error;
};

CimrtState cimrt_init(const ChannelMatrix& H);

// Applies the (k, j) plane rotation to the columns of B in the symbol-weighted basis.
void apply_plane_rotation(CMatrix& B, const SymbolVector& d, int k, int j, double alpha,
                          double delta);

CimrtOutput cimrt_precoder(const ChannelMatrix& H, const SymbolVector& d, const RVector& powers,
                           double P, const CimrtOptions& opt = {});

const char* plane_status_name(PlaneStatus s);

}  // namespace cip
