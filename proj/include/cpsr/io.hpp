#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cpsr/config.hpp"
#include "cpsr/rates.hpp"
#include "cpsr/spectrum.hpp"

namespace cpsr {

struct ParsedConfig {
    CellConfig cell;
    BeamConfig beam;
    std::vector<std::string> warnings;
};

// Flat `key = value` text with `#` comments. Keys carry their unit
// (temperature_c, gamma_opt_ghz, p_control_mw, omega_a_hz, ...); "Hz" keys
// are converted to rad/s on the way in (Hz == 2*pi/s). temperature_k is
// accepted in place of temperature_c. Unknown, duplicate, or missing keys and
// malformed numbers raise ConfigError (with line numbers where applicable).
ParsedConfig parse_config(const std::string& text);
ParsedConfig load_config(const std::string& path);

// Fixed 9-significant-digit formatting used by every CSV emitter.
std::string fmt9(double v);

// Header: omega_hz,re_t,im_t,abs_t,phase_deg. Frequencies in the user-facing
// "Hz" convention (rad/s divided by 2*pi).
void write_spectrum_csv(std::ostream& out, const Spectrum& spec);

// Human-readable report of every derived rate. Machine-precision values in
// `key = value` form (rates in rad/s), with the "Hz" equivalents and units in
// trailing comments; warnings appear as `# warning:` lines.
std::string params_report(const DerivedRates& rates);

// Exact inverse of params_report (bit-identical DerivedRates).
DerivedRates parse_params_report(const std::string& text);

// Two-column `x,y` CSV with an optional single header row.
std::vector<std::pair<double, double>> read_xy_csv(std::istream& in);

} // namespace cpsr
