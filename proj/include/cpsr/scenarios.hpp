#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cpsr/config.hpp"
#include "cpsr/lineshape.hpp"
#include "cpsr/rates.hpp"
#include "cpsr/spectrum.hpp"

namespace cpsr {

struct SweepAxis {
    std::string parameter;      // config-schema key being swept
    std::vector<double> values; // in that key's config units
};

// Larmor drift with pump power (lightshift): omega_a interpolated linearly
// between the anchors while p_pump is swept.
struct PumpLaw {
    double p_lo_mw = 0.0, p_hi_mw = 0.0;
    double omega_a_lo = 0.0, omega_a_hi = 0.0; // rad/s
};

struct Scenario {
    std::string name;
    CellConfig cell;
    BeamConfig beam;
    std::optional<SweepAxis> sweep;
    std::optional<PumpLaw> pump_law;
    std::vector<std::string> outputs; // requested products
    std::string config_text;          // canonical serialized form
};

// Bundled parameter sets: rb_fig2, rb_serf_sweep, rb_pump_sweep, k_fig4.
// Unknown names raise ConfigError listing the valid ones. Each scenario's
// cell/beam are constructed by parsing config_text, so the serialized form
// round-trips bit-exactly by construction.
Scenario builtin(const std::string& name);
std::vector<std::string> builtin_names();

// Two symmetric windows around +-omega_a covering several linewidths while
// staying clear of omega = 0; points_per_side points each, ascending.
std::vector<double> default_grid(const DerivedRates& rates, int points_per_side = 100);

struct SerfSweepRow {
    double omega_a = 0.0; // rad/s
    DerivedRates rates;
    CpsrLineFit analytic;
    CpsrLineFit detailed;
    std::string error; // nonempty if this row failed; fits invalid then
};
struct QuadraticFit {
    double a = 0.0; // rad/s per (rad/s)^2
    double b = 0.0; // rad/s
};
struct SerfSweepResult {
    std::vector<SerfSweepRow> rows;
    QuadraticFit analytic_fit; // FWHM(omega_a) = a*omega_a^2 + b
    QuadraticFit detailed_fit;
    double predicted_a = 0.0;  // (q^2 - q(1)^2)/(q R_se) from the base rates
};
// omega_a values in rad/s. Rows that fail record the error and are skipped by
// the quadratic fits.
SerfSweepResult run_serf_sweep(const Scenario& base,
                               const std::vector<double>& omega_a_values,
                               int points_per_side = 100);

struct PumpSweepRow {
    double p_pump_mw = 0.0;
    double r_pump_over_q = 0.0;         // rad/s
    double amplification_analytic = 0.0; // |t(-omega_r)| - 1
    double amplification_detailed = 0.0;
    DerivedRates rates;
    std::string error;
};
struct PumpSweepResult {
    std::vector<PumpSweepRow> rows;
    std::size_t argmax_analytic = 0; // index of the largest amplification
    std::size_t argmax_detailed = 0;
};
PumpSweepResult run_pump_sweep(const Scenario& base,
                               const std::vector<double>& p_pump_values_mw);

struct ComparisonRow {
    double omega = 0.0;
    std::complex<double> analytic;
    std::complex<double> detailed;
    double abs_diff = 0.0;
};
struct ComparisonResult {
    std::vector<ComparisonRow> rows;
    double max_abs_diff = 0.0;
    double rms_diff = 0.0;
    DerivedRates rates;
};
ComparisonResult compare_models(const Scenario& sc, const std::vector<double>& grid);

} // namespace cpsr
