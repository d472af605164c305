#pragma once

#include <complex>
#include <vector>

#include "cpsr/rates.hpp"

namespace cpsr {

// One point of a two-photon transmission spectrum. omega is the signed
// two-photon detuning in rad/s; transmission is the complex ratio
// S2_out / (e^{-d(Delta)} S2_in), so |t| = 1 means neither loss nor gain.
struct SpectrumPoint {
    double omega = 0.0;
    std::complex<double> transmission{1.0, 0.0};
};

// Ordered spectrum plus the rate snapshot it was computed from.
// Omegas are strictly increasing by construction.
struct Spectrum {
    std::vector<SpectrumPoint> points;
    DerivedRates metadata;
};

} // namespace cpsr
