#pragma once

#include <string>
#include <vector>

#include "cpsr/config.hpp"

namespace cpsr {

// Every derived quantity of the parameter table, under the internal unit
// convention (rates in rad/s, cross-sections in cm^2, densities in cm^-3,
// photon fluxes in photons/s).
struct DerivedRates {
    Species species = Species::RbNatural;
    double n_a_cm3 = 0.0;        // vapor number density
    double sigma0_cm2 = 0.0;     // absorption cross-section on resonance
    double sigma_delta_cm2 = 0.0;// ... at the probe detuning
    double d0 = 0.0;             // optical depth on resonance
    double d_delta = 0.0;        // optical depth at the probe detuning
    double q = 0.0;              // slowing-down factor at the operating polarization
    double p_a = 0.0;            // axial spin polarization
    double r_se = 0.0;           // spin-exchange collision rate
    double r_pump = 0.0;         // optical pumping rate
    double r_c = 0.0;            // control-light absorption rate
    double gamma_se = 0.0;       // spin-exchange decoherence
    double gamma1 = 0.0;         // axial relaxation
    double gamma = 0.0;          // total transverse decoherence, gamma1 + gamma_se
    double s1_in = 0.0;          // control photon flux (photons/s)
    double s_perp_in = 0.0;      // modulation flux sqrt(Pc*Ps)/(hc/lambda)
    double k_la = 0.0;           // light->atom coupling (dimensionless)
    double k_al = 0.0;           // atom->light coupling (rad/s)
    double omega_coupling = 0.0; // two-photon coupling rate k_la*k_al (rad/s)

    // Input snapshots carried along for downstream solvers and audit trails.
    double omega_a = 0.0;        // rad/s
    double r_sd = 0.0;           // rad/s
    double delta_over_gamma = 0.0;
    double length_cm = 0.0;
    double area_cm2 = 0.0;

    std::vector<std::string> warnings;
};

// Saturated-vapor density fit, cm^-3. T outside [300, 600] K appends a warning.
double vapor_density(Species species, double temperature_k,
                     std::vector<std::string>* warnings = nullptr);

// Spin-temperature slowing-down factor q(p_a); even in p_a.
double slowing_down_factor(Species species, double p_a);
// dq/d|p_a|, used by the in-simulation polarization solve.
double slowing_down_derivative(Species species, double p_a);

// Spin-exchange decoherence rate (rad/s in, rad/s out).
double serf_broadening(double omega_a, double r_se, Species species, double p_a,
                       std::vector<std::string>* warnings = nullptr);

// Lorentzian absorption cross-section at detuning delta_ghz, cm^2. The optical
// width enters in ordinary cycles/s here: this calibration reproduces the
// published on-resonance optical depth of the rubidium cell (about 130); using
// rad/s would give about 21.
double absorption_cross_section(const CellConfig& cell, double delta_ghz);

double photon_energy_erg(double wavelength_nm);
double thermal_velocity_cm_s(Species species, double temperature_k);

// Populate every derived field from a validated configuration pair.
DerivedRates derive_all(const CellConfig& cell, const BeamConfig& beam);

} // namespace cpsr
