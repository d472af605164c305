#pragma once

#include <complex>
#include <vector>

#include "cpsr/metrics.hpp"
#include "cpsr/spectrum.hpp"

namespace cpsr {

// Closed-form model of the two-photon line. All frequencies in rad/s.

// Complex contrast C(omega) = i*Omega*omega_a / (omega_a^2 - (omega - i*gamma)^2).
// Transmission of the S2 quadrature is 1 - C. Throws std::domain_error for
// gamma <= 0 (the response is singular at omega = +-omega_a there).
std::complex<double> complex_contrast(double omega, double omega_coupling,
                                      double omega_a, double gamma);

// Evaluates 1 - C on a strictly increasing grid using rates.omega_coupling,
// rates.omega_a, rates.gamma. With include_attenuation the raw e^{-d(Delta)}
// factor is multiplied back in; by default transmission is normalized to it.
Spectrum spectrum(const std::vector<double>& grid, const DerivedRates& rates,
                  bool include_attenuation = false);

// Small-optical-depth estimate of the coupling rate, Omega ~ d0 * p_a * r_c / q.
// small_depth holds when the probe attenuation correction (1-e^{-d})/d stays
// within ~10% of unity, i.e. d_delta <= 0.2.
struct CouplingEstimate {
    double omega_coupling = 0.0;
    bool small_depth = false;
};
CouplingEstimate approx_coupling(double d0, double p_a, double r_c, double q,
                                 double d_delta);

// Predicted line summaries: absorption at +sqrt(omega_a^2+gamma^2) and gain at
// the mirror point, both with contrast Omega/(2*gamma) and FWHM 2*gamma.
// narrow_line holds when gamma <= omega_a/10, where those forms are accurate.
struct ClosedFormMetrics {
    LineMetrics absorption;
    LineMetrics gain;
    bool narrow_line = false;
};
ClosedFormMetrics closed_form_metrics(const DerivedRates& rates);

} // namespace cpsr
