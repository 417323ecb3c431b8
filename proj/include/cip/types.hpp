#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cip {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRow = Eigen::RowVectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

enum class Errc {
    InvalidArgument = 1,
    DimensionMismatch,
    DegenerateChannel,
    SingularChannel,
    IllConditioned,
    Infeasible,
    SolverFailure,
    UnsupportedShape,
    RotationInfeasible,
    AmbiguousDetection,
    Config,
    Io,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what, double detail = 0.0)
        : std::runtime_error(what), code_(code), detail_(detail) {}
    Errc code() const noexcept { return code_; }
    // condition estimate, duality gap, ... depending on the code
    double detail() const noexcept { return detail_; }

private:
    Errc code_;
    double detail_;
};

class ChannelMatrix {
public:
    ChannelMatrix() = default;
    explicit ChannelMatrix(CMatrix h, double sigma2_noise = 1.0);

    int K() const { return static_cast<int>(h_.rows()); }
    int M() const { return static_cast<int>(h_.cols()); }
    const CMatrix& H() const { return h_; }
    CRow row(int j) const { return h_.row(j); }
    double sigma2() const { return sigma2_; }

    ChannelMatrix with_rows(const std::vector<int>& rows) const;

private:
    CMatrix h_;
    double sigma2_ = 1.0;
};

// Rule placing constellation point 0: at angle 0, or half a step off
// (pi/order), which nests every order inside the sectors of the lower ones.
enum class PskOffset { Zero, HalfStep };

double psk_offset(int order, PskOffset rule);

struct PskSymbol {
    int order = 2;
    int index = 0;
    cplx value{1.0, 0.0};
    PskOffset rule = PskOffset::Zero;

    double angle() const { return std::arg(value); }
};

using SymbolVector = std::vector<PskSymbol>;

CVector symbol_values(const SymbolVector& d);

struct TransmitVector {
    CVector x;
    double power = 0.0;

    TransmitVector() = default;
    explicit TransmitVector(CVector v) : x(std::move(v)), power(x.squaredNorm()) {}
};

struct InterferenceReport {
    cplx psi{0.0, 0.0};
    bool constructive = false;
    double angle_margin = 0.0;
};

}  // namespace cip
