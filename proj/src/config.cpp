#include "cpsr/config.hpp"

#include "cpsr/errors.hpp"

namespace cpsr {

const char* species_name(Species s) {
    switch (s) {
    case Species::RbNatural: return "rb_natural";
    case Species::K: return "k";
    }
    return "?";
}

Species species_from_name(const std::string& name) {
    if (name == "rb_natural" || name == "rb") return Species::RbNatural;
    if (name == "k" || name == "k_natural") return Species::K;
    throw ConfigError("unknown species: " + name + " (expected rb_natural or k)");
}

void validate(const CellConfig& cell, std::vector<std::string>* warnings) {
    if (!(cell.temperature_k > 0)) throw ConfigError("cell temperature must be positive");
    if (!(cell.length_cm > 0)) throw ConfigError("cell length must be positive");
    if (!(cell.area_cm2 > 0)) throw ConfigError("cell cross-section must be positive");
    if (!(cell.gamma_opt_ghz > 0)) throw ConfigError("optical halfwidth must be positive");
    if (!(cell.wavelength_nm > 0)) throw ConfigError("wavelength must be positive");
    if (!(cell.f_osc > 0)) throw ConfigError("oscillator strength must be positive");
    if (!(cell.sigma_se_cm2 > 0)) throw ConfigError("spin-exchange cross-section must be positive");
    (void)warnings;
}

void validate(const BeamConfig& beam, std::vector<std::string>* warnings) {
    if (!(beam.p_control_mw > 0)) throw ConfigError("control power must be positive");
    if (beam.p_signal_mw < 0) throw ConfigError("signal power must be non-negative");
    if (beam.p_pump_mw < 0) throw ConfigError("pump power must be non-negative");
    if (beam.r_sd < 0) throw ConfigError("spin-destruction rate must be non-negative");
    if (warnings && beam.p_signal_mw > 0.1 * beam.p_control_mw)
        warnings->push_back("signal power exceeds 10% of control power; "
                            "the weak-signal model assumption is strained");
}

} // namespace cpsr
