#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace cip {

// Gaussian draws via Box-Muller on mt19937_64 so that streams are identical
// across standard libraries (std::normal_distribution is not specified bit-exactly).
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform() {
        // (0, 1]
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    int below(int n) { return static_cast<int>(eng_() % static_cast<uint64_t>(n)); }

    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * 3.14159265358979323846 * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    // circularly symmetric, unit variance
    std::complex<double> cgauss() {
        const double s = std::sqrt(0.5);
        const double re = gauss();
        return {s * re, s * gauss()};
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cip
