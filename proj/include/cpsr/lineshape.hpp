#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cpsr/metrics.hpp"
#include "cpsr/spectrum.hpp"

namespace cpsr {

// Fixed hyperfine transition comb used by the one-photon absorption model.
// Offsets in GHz relative to the line centroid; strengths sum to 1.
struct HyperfineLine {
    double offset_ghz = 0.0;
    double strength = 0.0;
};
struct HyperfineLineList {
    std::vector<HyperfineLine> lines;
};

// Plain-text format: `<offset_GHz> <relative_strength>` per line, `#` comments.
// Strengths must be positive; they are renormalized to sum to 1 on load.
HyperfineLineList load_line_list(const std::string& path);
HyperfineLineList parse_line_list(const std::string& text);

// Optical depth d(nu) = od * sum_k w_k / (1 + ((nu - nu_k)/gamma)^2).
double one_photon_depth(double nu_ghz, double od, double gamma_ghz,
                        const HyperfineLineList& lines);
std::vector<double> one_photon_model(const std::vector<double>& nu_ghz,
                                     double od, double gamma_ghz,
                                     const HyperfineLineList& lines);

// Two-parameter absorption fit (overall depth and optical width), with the
// reference power as a nuisance scale. Covariance is the 2x2 (od, gamma)
// block; residual is the RMS misfit in optical-depth units.
struct AbsorptionFit {
    double od = 0.0;
    double gamma_opt_ghz = 0.0;
    double covariance[4] = {0.0, 0.0, 0.0, 0.0};
    double residual = 0.0;
    int iterations = 0;
};

// data: (frequency GHz, transmitted power) pairs, any positive power unit.
// Throws DataError on non-positive powers or fewer than 10 points, FitError
// on non-convergence or an unphysical optimum.
AbsorptionFit fit_one_photon(const std::vector<std::pair<double, double>>& data,
                             const HyperfineLineList& lines);

// Full result of fitting |1 - C(omega; Omega, omega_a, gamma)| + baseline to
// |transmission|. Model parameters and their standard errors are in rad/s;
// the LineMetrics pair reports centers +-sqrt(omega_a^2+gamma^2), FWHM
// 2*gamma and contrast Omega*omega_a/(2*gamma*omega_r). Model-free extremum
// contrasts (relative to the unit baseline) and raw half-prominence widths
// are exported alongside; raw widths are NaN when the crossing leaves the grid.
struct CpsrLineFit {
    LineMetrics absorption;
    LineMetrics gain;
    double omega_coupling = 0.0, gamma = 0.0, omega_a = 0.0, baseline = 0.0;
    double omega_coupling_err = 0.0, gamma_err = 0.0, omega_a_err = 0.0,
           baseline_err = 0.0;
    double extremum_contrast_absorption = 0.0;
    double extremum_contrast_gain = 0.0;
    double raw_width_absorption = 0.0;
    double raw_width_gain = 0.0;
    int iterations = 0;
};

// Throws FitError when no extremum rises above numerical noise or the fit does
// not converge within 200 iterations (the message carries the last residual).
CpsrLineFit fit_cpsr_line(const Spectrum& spec);

} // namespace cpsr
