#pragma once

// Physical constants in CGS units plus the unit conventions used throughout.
//
// Internal convention: every spin rate / frequency named omega_*, gamma_*, r_*
// is an angular rate in rad/s. Values labeled "hz" at I/O boundaries follow the
// convention Hz == 2*pi rad/s, so io_hz = internal / TWO_PI.
// Optical detunings and optical linewidths (delta_ghz, gamma_opt_ghz) are kept
// in ordinary cycle frequency (GHz); only their ratios and the absorption
// cross-section formula consume them, and that formula is calibrated in
// cycles/s (see absorption_cross_section in rates.cpp).

namespace cpsr {

inline constexpr double TWO_PI = 6.283185307179586476925286766559;

inline constexpr double C_LIGHT_CM_S = 2.99792458e10;   // speed of light
inline constexpr double R_E_CM = 2.8179403262e-13;      // classical electron radius
inline constexpr double H_ERG_S = 6.62607015e-27;       // Planck constant
inline constexpr double KB_ERG_K = 1.380649e-16;        // Boltzmann constant

inline constexpr double F_OSC_D1_DEFAULT = 0.34;        // D1 oscillator strength
inline constexpr double SIGMA_SE_DEFAULT_CM2 = 1.8e-14; // spin-exchange cross-section
inline constexpr double MU_RB_G = 7.1e-23;              // reduced mass, Rb-Rb pair
inline constexpr double MU_K_G = 3.25e-23;              // reduced mass, K-K pair

inline constexpr double ERG_S_PER_MW = 1.0e4;           // 1 mW = 1e4 erg/s

inline constexpr double hz_to_rad(double hz) { return hz * TWO_PI; }
inline constexpr double rad_to_hz(double rad) { return rad / TWO_PI; }

} // namespace cpsr
