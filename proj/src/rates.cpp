#include "cpsr/rates.hpp"

#include <cmath>

#include "cpsr/errors.hpp"

namespace cpsr {

double vapor_density(Species species, double temperature_k,
                     std::vector<std::string>* warnings) {
    if (!(temperature_k > 0)) throw std::domain_error("vapor_density: temperature must be positive");
    if (warnings && (temperature_k < 300.0 || temperature_k > 600.0))
        warnings->push_back("vapor_density: temperature outside the fitted range [300, 600] K");
    const double T = temperature_k;
    switch (species) {
    case Species::RbNatural: return std::pow(10.0, 26.178 - 4040.0 / T) / T;
    case Species::K: return std::pow(10.0, 26.268 - 4453.0 / T) / T;
    }
    throw std::domain_error("vapor_density: unknown species");
}

namespace {

double q_i32(double p2) { return (6.0 + 2.0 * p2) / (1.0 + p2); }
double q_i52(double p2) {
    const double p4 = p2 * p2;
    return (38.0 + 52.0 * p2 + 6.0 * p4) / (3.0 + 10.0 * p2 + 3.0 * p4);
}

double dq_i32(double p) {
    const double d = 1.0 + p * p;
    return -8.0 * p / (d * d);
}

double dq_i52(double p) {
    const double p2 = p * p, p4 = p2 * p2;
    const double num = 38.0 + 52.0 * p2 + 6.0 * p4;
    const double den = 3.0 + 10.0 * p2 + 3.0 * p4;
    const double dnum = 104.0 * p + 24.0 * p2 * p;
    const double dden = 20.0 * p + 12.0 * p2 * p;
    return (dnum * den - num * dden) / (den * den);
}

// Natural rubidium: 72.2% I=5/2 and 27.8% I=3/2.
constexpr double RB_W52 = 0.722;
constexpr double RB_W32 = 0.278;

} // namespace

double slowing_down_factor(Species species, double p_a) {
    const double p = std::fabs(p_a);
    if (p > 1.0) throw std::domain_error("slowing_down_factor: |p_a| must be <= 1");
    const double p2 = p * p;
    switch (species) {
    case Species::RbNatural: return RB_W52 * q_i52(p2) + RB_W32 * q_i32(p2);
    case Species::K: return q_i32(p2);
    }
    throw std::domain_error("slowing_down_factor: unknown species");
}

double slowing_down_derivative(Species species, double p_a) {
    const double p = std::fabs(p_a);
    if (p > 1.0) throw std::domain_error("slowing_down_derivative: |p_a| must be <= 1");
    switch (species) {
    case Species::RbNatural: return RB_W52 * dq_i52(p) + RB_W32 * dq_i32(p);
    case Species::K: return dq_i32(p);
    }
    throw std::domain_error("slowing_down_derivative: unknown species");
}

double serf_broadening(double omega_a, double r_se, Species species, double p_a,
                       std::vector<std::string>* warnings) {
    if (!(r_se > 0)) throw std::domain_error("serf_broadening: r_se must be positive");
    if (warnings && r_se < 10.0 * std::fabs(omega_a))
        warnings->push_back("serf_broadening: r_se < 10*omega_a, outside the "
                            "rapid-spin-exchange regime");
    const double q = slowing_down_factor(species, p_a);
    const double q1 = slowing_down_factor(species, 1.0);
    return (q * q - q1 * q1) * omega_a * omega_a / (2.0 * q * r_se);
}

double absorption_cross_section(const CellConfig& cell, double delta_ghz) {
    // Optical width in ordinary cycles/s (not angular); see header note.
    const double gamma_cps = cell.gamma_opt_ghz * 1e9;
    const double sigma0 = C_LIGHT_CM_S * R_E_CM * cell.f_osc / gamma_cps;
    const double x = delta_ghz / cell.gamma_opt_ghz;
    return sigma0 / (1.0 + x * x);
}

double photon_energy_erg(double wavelength_nm) {
    return H_ERG_S * C_LIGHT_CM_S / (wavelength_nm * 1e-7);
}

double thermal_velocity_cm_s(Species species, double temperature_k) {
    const double mu = species == Species::RbNatural ? MU_RB_G : MU_K_G;
    return std::sqrt(8.0 * KB_ERG_K * temperature_k / (M_PI * mu));
}

DerivedRates derive_all(const CellConfig& cell, const BeamConfig& beam) {
    DerivedRates r;
    validate(cell, &r.warnings);
    validate(beam, &r.warnings);

    r.species = cell.species;
    r.length_cm = cell.length_cm;
    r.area_cm2 = cell.area_cm2;
    r.omega_a = beam.omega_a;
    r.r_sd = beam.r_sd;
    r.delta_over_gamma = beam.delta_ghz / cell.gamma_opt_ghz;

    r.n_a_cm3 = vapor_density(cell.species, cell.temperature_k, &r.warnings);
    r.sigma0_cm2 = absorption_cross_section(cell, 0.0);
    r.sigma_delta_cm2 = absorption_cross_section(cell, beam.delta_ghz);
    r.d0 = r.n_a_cm3 * r.sigma0_cm2 * cell.length_cm;
    r.d_delta = r.n_a_cm3 * r.sigma_delta_cm2 * cell.length_cm;

    const double e_ph = photon_energy_erg(cell.wavelength_nm);
    r.s1_in = beam.p_control_mw * ERG_S_PER_MW / (2.0 * e_ph);
    r.s_perp_in = std::sqrt(beam.p_control_mw * ERG_S_PER_MW *
                            beam.p_signal_mw * ERG_S_PER_MW) / e_ph;
    r.r_pump = absorption_cross_section(cell, beam.delta_pump_ghz) *
               beam.p_pump_mw * ERG_S_PER_MW / (cell.area_cm2 * e_ph);
    r.r_c = 2.0 * r.sigma_delta_cm2 * r.s1_in / cell.area_cm2;

    // Steady-state polarization: the slowing-down factor cancels, so the fixed
    // point is the pumping/destruction branching ratio directly.
    const double total = r.r_pump + beam.r_sd;
    r.p_a = total > 0 ? r.r_pump / total : 0.0;
    r.q = slowing_down_factor(cell.species, r.p_a);

    r.r_se = r.n_a_cm3 * cell.sigma_se_cm2 *
             thermal_velocity_cm_s(cell.species, cell.temperature_k);
    r.gamma_se = serf_broadening(beam.omega_a, r.r_se, cell.species, r.p_a, &r.warnings);
    r.gamma1 = (beam.r_sd + r.r_pump) / r.q;
    r.gamma = r.gamma1 + r.gamma_se;

    const double att = 1.0 - std::exp(-r.d_delta);
    r.k_la = att * r.delta_over_gamma * r.p_a;
    r.k_al = (2.0 / r.q) * r.delta_over_gamma * r.sigma_delta_cm2 * r.s1_in / cell.area_cm2;
    r.omega_coupling = r.k_la * r.k_al;
    return r;
}

} // namespace cpsr
