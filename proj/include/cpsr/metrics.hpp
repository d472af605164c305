#pragma once

namespace cpsr {

// Summary of one transmission extremum. center and fwhm are rad/s internally;
// contrast is the unsigned depth/height relative to the unit baseline
// (|C| at the extremum), fit_residual the RMS misfit of the model used.
struct LineMetrics {
    double center = 0.0;
    double fwhm = 0.0;
    double contrast = 0.0;
    bool is_gain = false;
    double fit_residual = 0.0;
};

} // namespace cpsr
