// Command-line front end: config parsing, model dispatch, CSV output.
// Data goes to stdout (or -o FILE); diagnostics and summaries to stderr.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "cpsr/analytic.hpp"
#include "cpsr/bloch.hpp"
#include "cpsr/constants.hpp"
#include "cpsr/errors.hpp"
#include "cpsr/io.hpp"
#include "cpsr/lineshape.hpp"
#include "cpsr/rates.hpp"
#include "cpsr/scenarios.hpp"

namespace {

using namespace cpsr;

// Sink selecting stdout or a file; "-" means stdout.
class Output {
  public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw ConfigError("cannot open output file: " + path);
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

std::vector<double> grid_from_hz(double lo_hz, double hi_hz, int n) {
    if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
    if (!(lo_hz < hi_hz))
        throw std::invalid_argument("grid minimum must be below maximum");
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            hz_to_rad(lo_hz + (hi_hz - lo_hz) * i / (n - 1));
    return g;
}

std::vector<std::pair<double, double>> read_xy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file: " + path);
    return read_xy_csv(in);
}

void write_comparison_csv(std::ostream& out, const ComparisonResult& cmp) {
    out << "omega_hz,re_t_analytic,im_t_analytic,abs_t_analytic,"
           "re_t_detailed,im_t_detailed,abs_t_detailed,abs_diff\n";
    for (const auto& row : cmp.rows) {
        out << fmt9(rad_to_hz(row.omega)) << ',' << fmt9(row.analytic.real())
            << ',' << fmt9(row.analytic.imag()) << ','
            << fmt9(std::abs(row.analytic)) << ',' << fmt9(row.detailed.real())
            << ',' << fmt9(row.detailed.imag()) << ','
            << fmt9(std::abs(row.detailed)) << ',' << fmt9(row.abs_diff)
            << '\n';
    }
}

constexpr const char* RATES_COLUMNS =
    "n_a_cm3,sigma0_cm2,sigma_delta_cm2,d0,d_delta,q,p_a,r_se_hz,r_pump_hz,"
    "r_c_hz,gamma_se_hz,gamma1_hz,gamma_hz,s1_in,s_perp_in,k_la,k_al_hz,"
    "omega_coupling_hz,r_sd_hz,delta_over_gamma,length_cm,area_cm2";

void rates_columns(std::ostream& out, const DerivedRates& r) {
    out << fmt9(r.n_a_cm3) << ',' << fmt9(r.sigma0_cm2) << ','
        << fmt9(r.sigma_delta_cm2) << ',' << fmt9(r.d0) << ','
        << fmt9(r.d_delta) << ',' << fmt9(r.q) << ',' << fmt9(r.p_a) << ','
        << fmt9(rad_to_hz(r.r_se)) << ',' << fmt9(rad_to_hz(r.r_pump)) << ','
        << fmt9(rad_to_hz(r.r_c)) << ',' << fmt9(rad_to_hz(r.gamma_se)) << ','
        << fmt9(rad_to_hz(r.gamma1)) << ',' << fmt9(rad_to_hz(r.gamma)) << ','
        << fmt9(r.s1_in) << ',' << fmt9(r.s_perp_in) << ',' << fmt9(r.k_la)
        << ',' << fmt9(rad_to_hz(r.k_al)) << ','
        << fmt9(rad_to_hz(r.omega_coupling)) << ',' << fmt9(rad_to_hz(r.r_sd))
        << ',' << fmt9(r.delta_over_gamma) << ',' << fmt9(r.length_cm) << ','
        << fmt9(r.area_cm2);
}

void write_serf_csv(std::ostream& out, const SerfSweepResult& res) {
    out << "omega_a_hz,fwhm_analytic_hz,center_analytic_hz,contrast_analytic,"
           "fwhm_detailed_hz,center_detailed_hz,contrast_detailed,"
        << RATES_COLUMNS << ",error\n";
    const double nan = std::nan("");
    for (const auto& row : res.rows) {
        const bool ok = row.error.empty();
        out << fmt9(rad_to_hz(row.omega_a)) << ','
            << fmt9(ok ? rad_to_hz(row.analytic.absorption.fwhm) : nan) << ','
            << fmt9(ok ? rad_to_hz(row.analytic.absorption.center) : nan)
            << ',' << fmt9(ok ? row.analytic.absorption.contrast : nan) << ','
            << fmt9(ok ? rad_to_hz(row.detailed.absorption.fwhm) : nan) << ','
            << fmt9(ok ? rad_to_hz(row.detailed.absorption.center) : nan)
            << ',' << fmt9(ok ? row.detailed.absorption.contrast : nan) << ',';
        rates_columns(out, row.rates);
        out << ',' << row.error << '\n';
    }
}

void write_pump_csv(std::ostream& out, const PumpSweepResult& res) {
    out << "p_pump_mw,omega_a_hz,r_pump_over_q_hz,amplification_analytic,"
           "amplification_detailed,"
        << RATES_COLUMNS << ",error\n";
    const double nan = std::nan("");
    for (const auto& row : res.rows) {
        const bool ok = row.error.empty();
        out << fmt9(row.p_pump_mw) << ','
            << fmt9(rad_to_hz(row.rates.omega_a)) << ','
            << fmt9(rad_to_hz(row.r_pump_over_q)) << ','
            << fmt9(ok ? row.amplification_analytic : nan) << ','
            << fmt9(ok ? row.amplification_detailed : nan) << ',';
        rates_columns(out, row.rates);
        out << ',' << row.error << '\n';
    }
}

void run_sweep_scenario(const Scenario& sc, int points, Output& sink) {
    if (!sc.sweep) throw ConfigError("scenario '" + sc.name + "' has no sweep axis");
    const SweepAxis& ax = *sc.sweep;
    if (ax.parameter == "omega_a_hz") {
        std::vector<double> wa;
        wa.reserve(ax.values.size());
        for (double v : ax.values) wa.push_back(hz_to_rad(v));
        const SerfSweepResult res = run_serf_sweep(sc, wa, points);
        write_serf_csv(sink.stream(), res);
        std::cerr << "fwhm(omega_a) = a*omega_a^2 + b, I/O units (Hz):\n"
                  << "  analytic:  a = " << fmt9(res.analytic_fit.a * TWO_PI)
                  << ", b = " << fmt9(rad_to_hz(res.analytic_fit.b)) << '\n'
                  << "  detailed:  a = " << fmt9(res.detailed_fit.a * TWO_PI)
                  << ", b = " << fmt9(rad_to_hz(res.detailed_fit.b)) << '\n'
                  << "  predicted: a = " << fmt9(res.predicted_a * TWO_PI)
                  << '\n';
        return;
    }
    if (ax.parameter == "p_pump_mw") {
        const PumpSweepResult res = run_pump_sweep(sc, ax.values);
        write_pump_csv(sink.stream(), res);
        const auto& ra = res.rows[res.argmax_analytic];
        const auto& rd = res.rows[res.argmax_detailed];
        std::cerr << "amplification argmax: analytic at " << fmt9(ra.p_pump_mw)
                  << " mW (r_pump/q = " << fmt9(rad_to_hz(ra.r_pump_over_q))
                  << " Hz), detailed at " << fmt9(rd.p_pump_mw)
                  << " mW (r_pump/q = " << fmt9(rad_to_hz(rd.r_pump_over_q))
                  << " Hz)\n";
        return;
    }
    throw ConfigError("unsupported sweep parameter: " + ax.parameter);
}

void print_cpsr_fit(std::ostream& out, const CpsrLineFit& fit) {
    out << "omega_coupling_hz = " << fmt9(rad_to_hz(fit.omega_coupling))
        << " +- " << fmt9(rad_to_hz(fit.omega_coupling_err)) << '\n'
        << "gamma_hz = " << fmt9(rad_to_hz(fit.gamma)) << " +- "
        << fmt9(rad_to_hz(fit.gamma_err)) << '\n'
        << "omega_a_hz = " << fmt9(rad_to_hz(fit.omega_a)) << " +- "
        << fmt9(rad_to_hz(fit.omega_a_err)) << '\n'
        << "baseline = " << fmt9(fit.baseline) << " +- "
        << fmt9(fit.baseline_err) << '\n'
        << "center_absorption_hz = " << fmt9(rad_to_hz(fit.absorption.center))
        << '\n'
        << "fwhm_hz = " << fmt9(rad_to_hz(fit.absorption.fwhm)) << '\n'
        << "contrast = " << fmt9(fit.absorption.contrast) << '\n'
        << "extremum_contrast_absorption = "
        << fmt9(fit.extremum_contrast_absorption) << '\n'
        << "extremum_contrast_gain = " << fmt9(fit.extremum_contrast_gain)
        << '\n'
        << "rms_residual = " << fmt9(fit.absorption.fit_residual) << '\n';
}

int dispatch(const std::string& cmd, const std::string& config_path,
             const std::string& out_path, const std::string& model,
             const std::string& mode, bool attenuation, bool has_grid,
             double g_lo, double g_hi, int g_n, const std::string& name,
             int points, const std::string& input_path,
             const std::string& lines_path) {
    Output sink(out_path);

    if (cmd == "params") {
        const ParsedConfig pc = load_config(config_path);
        for (const auto& w : pc.warnings) std::cerr << "warning: " << w << '\n';
        const DerivedRates rates = derive_all(pc.cell, pc.beam);
        sink.stream() << params_report(rates);
        return 0;
    }

    if (cmd == "spectrum") {
        const ParsedConfig pc = load_config(config_path);
        for (const auto& w : pc.warnings) std::cerr << "warning: " << w << '\n';
        const DerivedRates rates = derive_all(pc.cell, pc.beam);
        const std::vector<double> grid =
            has_grid ? grid_from_hz(g_lo, g_hi, g_n) : default_grid(rates);
        if (model == "analytic") {
            write_spectrum_csv(sink.stream(),
                               spectrum(grid, rates, attenuation));
        } else if (model == "detailed") {
            const SimMode m =
                mode == "spatial" ? SimMode::Spatial : SimMode::Uniform;
            write_spectrum_csv(sink.stream(),
                               simulate_spectrum(pc.cell, pc.beam, grid, m));
        } else {
            Scenario sc;
            sc.cell = pc.cell;
            sc.beam = pc.beam;
            write_comparison_csv(sink.stream(), compare_models(sc, grid));
        }
        return 0;
    }

    if (cmd == "sweep") {
        run_sweep_scenario(builtin(name), points, sink);
        return 0;
    }

    if (cmd == "scenario") {
        const Scenario sc = builtin(name);
        if (sc.sweep) {
            run_sweep_scenario(sc, points, sink);
            return 0;
        }
        const DerivedRates rates = derive_all(sc.cell, sc.beam);
        const std::vector<double> grid = default_grid(rates, points);
        if (model == "analytic") {
            write_spectrum_csv(sink.stream(), spectrum(grid, rates));
        } else if (model == "detailed") {
            write_spectrum_csv(sink.stream(),
                               simulate_spectrum(sc.cell, sc.beam, grid));
        } else {
            write_comparison_csv(sink.stream(), compare_models(sc, grid));
        }
        return 0;
    }

    if (cmd == "fit-line") {
        auto xy = read_xy_file(input_path);
        std::sort(xy.begin(), xy.end());
        Spectrum spec;
        spec.points.reserve(xy.size());
        for (const auto& [x_hz, y] : xy)
            spec.points.push_back({hz_to_rad(x_hz), {y, 0.0}});
        print_cpsr_fit(sink.stream(), fit_cpsr_line(spec));
        return 0;
    }

    if (cmd == "fit-absorption") {
        auto xy = read_xy_file(input_path);
        std::sort(xy.begin(), xy.end());
        const HyperfineLineList lines = load_line_list(lines_path);
        const AbsorptionFit fit = fit_one_photon(xy, lines);
        sink.stream() << "od = " << fmt9(fit.od) << " +- "
                      << fmt9(std::sqrt(std::max(0.0, fit.covariance[0])))
                      << '\n'
                      << "gamma_opt_ghz = " << fmt9(fit.gamma_opt_ghz)
                      << " +- "
                      << fmt9(std::sqrt(std::max(0.0, fit.covariance[3])))
                      << '\n'
                      << "rms_residual = " << fmt9(fit.residual) << '\n';
        return 0;
    }

    throw ConfigError("unknown command: " + cmd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPSR vapor-cell transmission toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, name, input_path, lines_path;
    std::string model = "analytic";
    std::string mode = "uniform";
    bool attenuation = false;
    std::vector<double> grid_args;
    int points = 100;
    long seed = 0; // reserved for noise-injection utilities

    app.add_option("--seed", seed, "RNG seed (reserved; unused by the core)");

    auto add_output = [&](CLI::App* sub) {
        sub->add_option("-o,--output", out_path, "output file (default stdout)");
    };

    CLI::App* p_params = app.add_subcommand("params", "derive and print rates");
    p_params->add_option("--config", config_path, "config file")->required();
    add_output(p_params);

    CLI::App* p_spec =
        app.add_subcommand("spectrum", "transmission spectrum CSV");
    p_spec->add_option("--config", config_path, "config file")->required();
    p_spec->add_option("--grid", grid_args,
                       "MIN_HZ MAX_HZ N (default: auto around the resonance)")
        ->expected(3);
    p_spec->add_option("--model", model, "analytic | detailed | both")
        ->check(CLI::IsMember({"analytic", "detailed", "both"}));
    p_spec->add_option("--mode", mode, "detailed-model grid: uniform | spatial")
        ->check(CLI::IsMember({"uniform", "spatial"}));
    p_spec->add_flag("--attenuation", attenuation,
                     "include the one-photon attenuation factor (analytic)");
    add_output(p_spec);

    CLI::App* p_sweep = app.add_subcommand("sweep", "run a built-in sweep");
    p_sweep->add_option("--scenario", name, "rb_serf_sweep | rb_pump_sweep")
        ->required();
    p_sweep->add_option("--points", points, "grid points per side");
    add_output(p_sweep);

    CLI::App* p_scen =
        app.add_subcommand("scenario", "run a bundled parameter set");
    p_scen->add_option("name", name, "scenario name")->required();
    p_scen->add_option("--model", model, "analytic | detailed | both")
        ->check(CLI::IsMember({"analytic", "detailed", "both"}));
    p_scen->add_option("--points", points, "grid points per side");
    add_output(p_scen);
    p_scen->parse_complete_callback([&] {
        if (p_scen->count("--model") == 0) model = "both";
    });

    CLI::App* p_fitline =
        app.add_subcommand("fit-line", "fit a two-photon line from CSV");
    p_fitline->add_option("--input", input_path, "CSV: omega_hz,abs_t")
        ->required();
    add_output(p_fitline);

    CLI::App* p_fitabs = app.add_subcommand(
        "fit-absorption", "fit a one-photon absorption profile from CSV");
    p_fitabs->add_option("--input", input_path, "CSV: delta_ghz,power")
        ->required();
    p_fitabs->add_option("--lines", lines_path, "hyperfine line list file")
        ->required();
    add_output(p_fitabs);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    const bool has_grid = grid_args.size() == 3;
    const double g_lo = has_grid ? grid_args[0] : 0.0;
    const double g_hi = has_grid ? grid_args[1] : 0.0;
    const int g_n = has_grid ? static_cast<int>(grid_args[2]) : 0;

    try {
        return dispatch(cmd, config_path, out_path, model, mode, attenuation,
                        has_grid, g_lo, g_hi, g_n, name, points, input_path,
                        lines_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
