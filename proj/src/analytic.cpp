#include "cpsr/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace cpsr {

std::complex<double> complex_contrast(double omega, double omega_coupling,
                                      double omega_a, double gamma) {
    if (!(gamma > 0))
        throw std::domain_error("complex_contrast: gamma must be positive "
                                "(response singular at omega = +-omega_a)");
    const std::complex<double> z(omega, -gamma);
    const std::complex<double> denom = omega_a * omega_a - z * z;
    return std::complex<double>(0.0, omega_coupling * omega_a) / denom;
}

Spectrum spectrum(const std::vector<double>& grid, const DerivedRates& rates,
                  bool include_attenuation) {
    if (grid.empty()) throw std::invalid_argument("spectrum: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("spectrum: grid must be strictly increasing");

    const double att = include_attenuation ? std::exp(-rates.d_delta) : 1.0;
    Spectrum out;
    out.metadata = rates;
    out.points.reserve(grid.size());
    for (double w : grid) {
        const std::complex<double> t =
            1.0 - complex_contrast(w, rates.omega_coupling, rates.omega_a, rates.gamma);
        out.points.push_back({w, att * t});
    }
    return out;
}

CouplingEstimate approx_coupling(double d0, double p_a, double r_c, double q,
                                 double d_delta) {
    CouplingEstimate est;
    est.omega_coupling = d0 * p_a * r_c / q;
    est.small_depth = d_delta <= 0.2;
    return est;
}

ClosedFormMetrics closed_form_metrics(const DerivedRates& rates) {
    const double g = rates.gamma;
    const double wa = rates.omega_a;
    if (!(g > 0)) throw std::domain_error("closed_form_metrics: gamma must be positive");
    const double wr = std::sqrt(wa * wa + g * g);
    const double contrast = rates.omega_coupling / (2.0 * g);

    ClosedFormMetrics m;
    m.absorption = {wr, 2.0 * g, contrast, false, 0.0};
    m.gain = {-wr, 2.0 * g, contrast, true, 0.0};
    m.narrow_line = g <= 0.1 * wa;
    return m;
}

} // namespace cpsr
