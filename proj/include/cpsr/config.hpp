#pragma once

#include <string>
#include <vector>

#include "cpsr/constants.hpp"

namespace cpsr {

enum class Species { RbNatural, K };

const char* species_name(Species s);
Species species_from_name(const std::string& name);

// Vapor cell geometry and optical-line properties.
struct CellConfig {
    Species species = Species::RbNatural;
    double temperature_k = 0.0;   // K
    double length_cm = 0.0;       // optical path
    double area_cm2 = 0.0;        // beam / cell cross-section
    double gamma_opt_ghz = 0.0;   // pressure-broadened optical half width (HWHM), GHz
    double wavelength_nm = 0.0;   // D1 wavelength

    // Overridable model constants (sensitivity studies).
    double f_osc = F_OSC_D1_DEFAULT;
    double sigma_se_cm2 = SIGMA_SE_DEFAULT_CM2;
};

// Probe (control+signal) and pump beam parameters. Spin rates are angular (rad/s).
struct BeamConfig {
    double p_control_mw = 0.0;
    double p_signal_mw = 0.0;
    double delta_ghz = 0.0;       // probe detuning, signed
    double p_pump_mw = 0.0;
    double delta_pump_ghz = 0.0;
    double omega_a = 0.0;         // Larmor frequency incl. lightshift, rad/s
    double r_sd = 0.0;            // spin-destruction rate, rad/s
};

// Throw ConfigError on invariant violations; append soft-guard messages to
// `warnings` (model-validity checks that should not block a run).
void validate(const CellConfig& cell, std::vector<std::string>* warnings = nullptr);
void validate(const BeamConfig& beam, std::vector<std::string>* warnings = nullptr);

} // namespace cpsr
