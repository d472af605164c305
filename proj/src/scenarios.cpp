#include "cpsr/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "cpsr/analytic.hpp"
#include "cpsr/bloch.hpp"
#include "cpsr/errors.hpp"
#include "cpsr/io.hpp"

namespace cpsr {

namespace {

constexpr const char* RB_FIG2_CFG =
    "# heated Rb vapor cell, 268 Hz two-photon line\n"
    "species = rb_natural\n"
    "temperature_c = 154\n"
    "length_cm = 1\n"
    "area_cm2 = 1\n"
    "gamma_opt_ghz = 2.6\n"
    "wavelength_nm = 795\n"
    "p_control_mw = 15.2\n"
    "p_signal_mw = 0.02\n"
    "delta_ghz = 89\n"
    "p_pump_mw = 60\n"
    "delta_pump_ghz = 45\n"
    "omega_a_hz = 268\n"
    "r_sd_hz = 98\n";

constexpr const char* RB_PUMP_CFG =
    "# Rb cell, pump-power sweep baseline (omega_a drifts 290-400 Hz with pump)\n"
    "species = rb_natural\n"
    "temperature_c = 154\n"
    "length_cm = 1\n"
    "area_cm2 = 1\n"
    "gamma_opt_ghz = 2.6\n"
    "wavelength_nm = 795\n"
    "p_control_mw = 15.2\n"
    "p_signal_mw = 0.02\n"
    "delta_ghz = 116\n"
    "p_pump_mw = 0\n"
    "delta_pump_ghz = 45\n"
    "omega_a_hz = 290\n"
    "r_sd_hz = 94\n";

constexpr const char* K_FIG4_CFG =
    "# heated K vapor cell, 29 Hz two-photon line\n"
    "species = k\n"
    "temperature_c = 185\n"
    "length_cm = 1\n"
    "area_cm2 = 1.5\n"
    "gamma_opt_ghz = 12\n"
    "wavelength_nm = 770\n"
    "p_control_mw = 25\n"
    "p_signal_mw = 0.035\n"
    "delta_ghz = 215\n"
    "p_pump_mw = 1.6\n"
    "delta_pump_ghz = 100\n"
    "omega_a_hz = 29\n"
    "r_sd_hz = 27\n";

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

Scenario from_text(const std::string& name, const char* text) {
    Scenario sc;
    sc.name = name;
    sc.config_text = text;
    ParsedConfig pc = parse_config(sc.config_text);
    sc.cell = pc.cell;
    sc.beam = pc.beam;
    sc.outputs = {"spectrum", "metrics"};
    return sc;
}

} // namespace

std::vector<std::string> builtin_names() {
    return {"rb_fig2", "rb_serf_sweep", "rb_pump_sweep", "k_fig4"};
}

Scenario builtin(const std::string& name) {
    if (name == "rb_fig2") return from_text(name, RB_FIG2_CFG);
    if (name == "k_fig4") return from_text(name, K_FIG4_CFG);
    if (name == "rb_serf_sweep") {
        Scenario sc = from_text(name, RB_FIG2_CFG);
        sc.name = name;
        sc.sweep = SweepAxis{"omega_a_hz", linspace(100.0, 600.0, 11)};
        sc.outputs = {"sweep"};
        return sc;
    }
    if (name == "rb_pump_sweep") {
        Scenario sc = from_text(name, RB_PUMP_CFG);
        sc.sweep = SweepAxis{"p_pump_mw", linspace(0.0, 100.0, 21)};
        sc.pump_law = PumpLaw{0.0, 100.0, hz_to_rad(290.0), hz_to_rad(400.0)};
        sc.outputs = {"sweep"};
        return sc;
    }
    std::string valid;
    for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown scenario '" + name + "'; valid names: " + valid);
}

std::vector<double> default_grid(const DerivedRates& rates, int points_per_side) {
    if (!(rates.omega_a > 0))
        throw std::invalid_argument("default_grid: omega_a must be positive");
    if (points_per_side < 2)
        throw std::invalid_argument("default_grid: need at least 2 points per side");
    const double fwhm = 2.0 * rates.gamma;
    double hw = std::max(5.0 * fwhm, 0.15 * rates.omega_a);
    hw = std::min(hw, 0.85 * rates.omega_a);
    const std::vector<double> pos =
        linspace(rates.omega_a - hw, rates.omega_a + hw, points_per_side);
    std::vector<double> grid;
    grid.reserve(pos.size() * 2);
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
    grid.insert(grid.end(), pos.begin(), pos.end());
    return grid;
}

namespace {

QuadraticFit quadratic_lsq(const std::vector<double>& x, const std::vector<double>& y) {
    // FWHM = a*x^2 + b, linear least squares over the basis (x^2, 1).
    double s8 = 0, s4 = 0, s0 = 0, r4 = 0, r0 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x2 = x[i] * x[i];
        s8 += x2 * x2;
        s4 += x2;
        s0 += 1.0;
        r4 += y[i] * x2;
        r0 += y[i];
    }
    const double det = s8 * s0 - s4 * s4;
    QuadraticFit f;
    f.a = (r4 * s0 - r0 * s4) / det;
    f.b = (s8 * r0 - s4 * r4) / det;
    return f;
}

} // namespace

SerfSweepResult run_serf_sweep(const Scenario& base,
                               const std::vector<double>& omega_a_values,
                               int points_per_side) {
    if (omega_a_values.empty())
        throw std::invalid_argument("run_serf_sweep: empty sweep");
    SerfSweepResult result;
    result.rows.reserve(omega_a_values.size());

    for (double wa : omega_a_values) {
        SerfSweepRow row;
        row.omega_a = wa;
        try {
            BeamConfig beam = base.beam;
            beam.omega_a = wa;
            row.rates = derive_all(base.cell, beam);
            const std::vector<double> grid = default_grid(row.rates, points_per_side);
            row.analytic = fit_cpsr_line(spectrum(grid, row.rates));
            row.detailed =
                fit_cpsr_line(simulate_spectrum(base.cell, beam, grid, SimMode::Uniform));
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }

    std::vector<double> x, ya, yd;
    for (const auto& row : result.rows) {
        if (!row.error.empty()) continue;
        x.push_back(row.omega_a);
        ya.push_back(row.analytic.absorption.fwhm);
        yd.push_back(row.detailed.absorption.fwhm);
    }
    if (x.size() >= 3) {
        result.analytic_fit = quadratic_lsq(x, ya);
        result.detailed_fit = quadratic_lsq(x, yd);
    }

    const DerivedRates base_rates = derive_all(base.cell, base.beam);
    const double q1 = slowing_down_factor(base.cell.species, 1.0);
    result.predicted_a =
        (base_rates.q * base_rates.q - q1 * q1) / (base_rates.q * base_rates.r_se);
    return result;
}

PumpSweepResult run_pump_sweep(const Scenario& base,
                               const std::vector<double>& p_pump_values_mw) {
    if (p_pump_values_mw.empty())
        throw std::invalid_argument("run_pump_sweep: empty sweep");
    PumpSweepResult result;
    result.rows.reserve(p_pump_values_mw.size());

    for (double p_mw : p_pump_values_mw) {
        PumpSweepRow row;
        row.p_pump_mw = p_mw;
        try {
            BeamConfig beam = base.beam;
            beam.p_pump_mw = p_mw;
            if (base.pump_law) {
                const PumpLaw& law = *base.pump_law;
                const double t = (p_mw - law.p_lo_mw) / (law.p_hi_mw - law.p_lo_mw);
                beam.omega_a = law.omega_a_lo + t * (law.omega_a_hi - law.omega_a_lo);
            }
            row.rates = derive_all(base.cell, beam);
            row.r_pump_over_q = row.rates.r_pump / row.rates.q;
            const double wr = std::sqrt(row.rates.omega_a * row.rates.omega_a +
                                        row.rates.gamma * row.rates.gamma);
            const std::complex<double> t_analytic =
                1.0 - complex_contrast(-wr, row.rates.omega_coupling,
                                       row.rates.omega_a, row.rates.gamma);
            row.amplification_analytic = std::abs(t_analytic) - 1.0;
            const Spectrum det =
                simulate_spectrum(base.cell, beam, {-wr}, SimMode::Uniform);
            row.amplification_detailed = std::abs(det.points[0].transmission) - 1.0;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        result.rows.push_back(std::move(row));
    }

    auto argmax = [&](auto field) {
        std::size_t best = 0;
        double best_v = -1e300;
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            if (!result.rows[i].error.empty()) continue;
            const double v = field(result.rows[i]);
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
        return best;
    };
    result.argmax_analytic =
        argmax([](const PumpSweepRow& r) { return r.amplification_analytic; });
    result.argmax_detailed =
        argmax([](const PumpSweepRow& r) { return r.amplification_detailed; });
    return result;
}

ComparisonResult compare_models(const Scenario& sc, const std::vector<double>& grid) {
    ComparisonResult result;
    result.rates = derive_all(sc.cell, sc.beam);
    const Spectrum an = spectrum(grid, result.rates);
    const Spectrum det = simulate_spectrum(sc.cell, sc.beam, grid, SimMode::Uniform);

    result.rows.resize(grid.size());
    double sum2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ComparisonRow& row = result.rows[i];
        row.omega = grid[i];
        row.analytic = an.points[i].transmission;
        row.detailed = det.points[i].transmission;
        row.abs_diff = std::abs(row.analytic - row.detailed);
        result.max_abs_diff = std::max(result.max_abs_diff, row.abs_diff);
        sum2 += row.abs_diff * row.abs_diff;
    }
    result.rms_diff = std::sqrt(sum2 / static_cast<double>(grid.size()));
    return result;
}

} // namespace cpsr
