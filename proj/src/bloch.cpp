#include "cpsr/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>

#include "cpsr/errors.hpp"
#include "cpsr/parallel.hpp"

namespace cpsr {

namespace {

// (1 - e^{-d})/d, stable for small d.
double mean_attenuation(double d) {
    if (std::fabs(d) < 1e-8) return 1.0 - 0.5 * d;
    return (1.0 - std::exp(-d)) / d;
}

// Exact mean of e^{g x/l} over the path, g = -d + i*rotation.
std::complex<double> mean_transverse(std::complex<double> g) {
    if (std::abs(g) < 1e-8) return 1.0 + 0.5 * g;
    return (std::exp(g) - 1.0) / g;
}

struct CellCoeffs {
    Species species{};
    double n_a = 0.0;
    double sigma = 0.0;   // cross-section at the probe detuning
    double dog = 0.0;     // Delta / Gamma
    double r_pump = 0.0;
    double r_sd = 0.0;
    double r_se = 0.0;
    double omega_a = 0.0;
    double q_full = 0.0;  // q at |p| = 1
};

CellCoeffs coeffs_from(const DerivedRates& r) {
    CellCoeffs c;
    c.species = r.species;
    c.n_a = r.n_a_cm3;
    c.sigma = r.sigma_delta_cm2;
    c.dog = r.delta_over_gamma;
    c.r_pump = r.r_pump;
    c.r_sd = r.r_sd;
    c.r_se = r.r_se;
    c.omega_a = r.omega_a;
    c.q_full = slowing_down_factor(r.species, 1.0);
    return c;
}

// Right-hand side of the spin equation for one cell, with the relaxation
// rates re-derived from the instantaneous axial polarization.
inline Vec3 spin_derivative(const CellCoeffs& c, const Vec3& f, double s3) {
    const double p = polarization_from_fz(c.species, f[2], c.n_a);
    const double q = slowing_down_factor(c.species, p);
    const double gamma1 = (c.r_sd + c.r_pump) / q;
    const double gamma_se = (q * q - c.q_full * c.q_full) * c.omega_a *
                            c.omega_a / (2.0 * q * c.r_se);
    const double gamma = gamma1 + gamma_se;
    const double lightshift = (2.0 / q) * c.dog * c.sigma * s3;
    return {c.omega_a * f[1] - gamma * f[0] + c.n_a * c.sigma * s3,
            -c.omega_a * f[0] - gamma * f[1] - lightshift * f[2],
            -gamma1 * f[2] + lightshift * f[1] + 0.5 * c.n_a * c.r_pump};
}

inline Vec3 fmadd(const Vec3& f, double h, const Vec3& k) {
    return {f[0] + h * k[0], f[1] + h * k[1], f[2] + h * k[2]};
}

// Accumulated Faraday rotation of (s1, s2) across the spin field. With more
// than one cell a rotation step above 0.1 rad means the field is undersampled.
double faraday_angle(const CellCoeffs& c, const std::vector<Vec3>& f,
                     double dx, bool guard_cells) {
    double phi = 0.0;
    for (const Vec3& fi : f) {
        const double p = polarization_from_fz(c.species, fi[2], c.n_a);
        const double q = slowing_down_factor(c.species, p);
        const double alpha = (2.0 / q) * c.dog * c.sigma * fi[0] * dx;
        if (guard_cells && std::fabs(alpha) > 0.1)
            throw RefinementError("propagate_light: rotation per cell exceeds "
                                  "0.1 rad; spatial grid too coarse");
        phi += alpha;
    }
    return phi;
}

} // namespace

Vec3 DriveWaveform::stokes_at(double t) const {
    const double ph = omega * t;
    return {s1_in, s_perp_in * std::cos(ph), -s_perp_in * std::sin(ph)};
}

double polarization_from_fz(Species species, double fz, double n_a_cm3) {
    if (!(n_a_cm3 > 0))
        throw std::domain_error("polarization_from_fz: density must be positive");
    const double target = 2.0 * fz / n_a_cm3; // equals p*q(p)
    if (target == 0.0) return 0.0;
    const double g_full = slowing_down_factor(species, 1.0);
    if (std::fabs(target) > g_full * (1.0 + 1e-3))
        throw IntegrationError("polarization_from_fz: axial spin density "
                               "beyond full polarization");
    double p = std::clamp(target / slowing_down_factor(species, 0.0), -1.0, 1.0);
    for (int it = 0; it < 50; ++it) {
        const double q = slowing_down_factor(species, p);
        // d(p*q)/dp is even in p and strictly positive.
        const double slope = q + std::fabs(p) * slowing_down_derivative(species, p);
        double pn = p - (p * q - target) / slope;
        pn = std::clamp(pn, -1.0, 1.0);
        if (std::fabs(pn - p) <= 1e-10 * std::max(1.0, std::fabs(pn))) return pn;
        p = pn;
    }
    throw IntegrationError("polarization_from_fz: polarization solve stalled");
}

LightField propagate_light(const std::vector<Vec3>& f, const Vec3& s_in,
                           const DerivedRates& rates) {
    const std::size_t n = f.size();
    if (n == 0) throw std::invalid_argument("propagate_light: empty spin field");
    const CellCoeffs c = coeffs_from(rates);
    LightField lf;
    lf.at_cells.resize(n);

    if (n == 1) {
        const double d = rates.d_delta;
        const double phi = faraday_angle(c, f, rates.length_cm, false);
        const std::complex<double> g(-d, phi);
        const std::complex<double> w_in(s_in[0], s_in[1]);
        const std::complex<double> w_out = w_in * std::exp(g);
        const std::complex<double> w_avg = w_in * mean_transverse(g);
        lf.at_cells[0] = {w_avg.real(), w_avg.imag(),
                          mean_attenuation(d) * s_in[2]};
        lf.out = {w_out.real(), w_out.imag(), std::exp(-d) * s_in[2]};
        return lf;
    }

    const double dx = rates.length_cm / static_cast<double>(n);
    const double d_cell = rates.d_delta / static_cast<double>(n);
    const double att_cell = std::exp(-d_cell);
    const double u_cell = mean_attenuation(d_cell);
    std::complex<double> w(s_in[0], s_in[1]);
    double s3 = s_in[2];
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<Vec3> one(1, f[i]);
        const double alpha = faraday_angle(c, one, dx, true);
        const std::complex<double> g(-d_cell, alpha);
        const std::complex<double> w_avg = w * mean_transverse(g);
        lf.at_cells[i] = {w_avg.real(), w_avg.imag(), u_cell * s3};
        w *= std::exp(g);
        s3 *= att_cell;
    }
    lf.out = {w.real(), w.imag(), s3};
    return lf;
}

SpinLightState make_initial_state(const DerivedRates& rates, int n_cells) {
    if (n_cells < 1)
        throw std::invalid_argument("make_initial_state: need at least one cell");
    SpinLightState st;
    st.grid_x.resize(n_cells);
    const double dx = rates.length_cm / n_cells;
    for (int i = 0; i < n_cells; ++i) st.grid_x[i] = (i + 0.5) * dx;
    const double fz0 = 0.5 * rates.q * rates.n_a_cm3 * rates.p_a;
    st.f.assign(n_cells, Vec3{0.0, 0.0, fz0});
    st.s.assign(n_cells, Vec3{0.0, 0.0, 0.0});
    return st;
}

void step_spin(SpinLightState& state, const std::vector<Vec3>& s_cells,
               double dt, const DerivedRates& rates) {
    if (s_cells.size() != state.f.size())
        throw std::invalid_argument("step_spin: one Stokes vector per cell required");
    const CellCoeffs c = coeffs_from(rates);
    for (std::size_t i = 0; i < state.f.size(); ++i) {
        const double s3 = s_cells[i][2];
        Vec3& f = state.f[i];
        const Vec3 k1 = spin_derivative(c, f, s3);
        const Vec3 k2 = spin_derivative(c, fmadd(f, 0.5 * dt, k1), s3);
        const Vec3 k3 = spin_derivative(c, fmadd(f, 0.5 * dt, k2), s3);
        const Vec3 k4 = spin_derivative(c, fmadd(f, dt, k3), s3);
        for (int a = 0; a < 3; ++a)
            f[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2])) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "step_spin: state diverged at t = %.6g s", state.t);
            throw IntegrationError(msg);
        }
    }
    state.t += dt;
}

namespace {

struct PointResult {
    std::complex<double> transmission;
    PointDiagnostics diag;
};

// Entry attenuation times within-cell mean: scales the drive s3 seen by each cell.
std::vector<double> s3_cell_factors(double d, int n) {
    std::vector<double> a(static_cast<std::size_t>(n));
    if (n == 1) {
        a[0] = mean_attenuation(d);
        return a;
    }
    const double dc = d / n;
    const double uc = mean_attenuation(dc);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = std::exp(-dc * i) * uc;
    return a;
}

PointResult simulate_point(const DerivedRates& rates, double omega,
                           int n_cells, const SimOptions& opt) {
    const CellCoeffs c = coeffs_from(rates);
    const double s1_den = rates.s1_in / rates.area_cm2;
    const double sp_den = rates.s_perp_in / rates.area_cm2;
    const double att = std::exp(-rates.d_delta);
    const double dx = rates.length_cm / n_cells;
    const bool guard = n_cells > 1;
    const std::vector<double> a3 = s3_cell_factors(rates.d_delta, n_cells);

    // Conservative bound on the fastest rate for the step size.
    const double q_zero = slowing_down_factor(rates.species, 0.0);
    const double gamma_bound =
        (c.r_sd + c.r_pump) / c.q_full +
        (q_zero * q_zero - c.q_full * c.q_full) * c.omega_a * c.omega_a /
            (2.0 * q_zero * c.r_se);
    const double ls_bound = (2.0 / c.q_full) * std::fabs(c.dog) * c.sigma * sp_den;
    const double rate_max = std::max({std::fabs(omega), c.omega_a, gamma_bound,
                                      ls_bound, 1e-12});
    const double dt_raw = opt.dt_safety * opt.dt_scale / rate_max;
    const double period = TWO_PI / std::fabs(omega);
    const std::int64_t n_p = std::max<std::int64_t>(
        16, static_cast<std::int64_t>(std::ceil(period / dt_raw)));
    const double dt = period / static_cast<double>(n_p);
    const int k_periods = std::max(1, opt.demod_periods);

    std::int64_t settle_periods =
        static_cast<std::int64_t>(
            std::ceil(std::max(10.0 / rates.gamma, 20.0 * period) / period)) +
        std::max(0, opt.extra_settle_periods);

    const double fz0 = 0.5 * rates.q * rates.n_a_cm3 * rates.p_a;
    std::vector<Vec3> f(static_cast<std::size_t>(n_cells), Vec3{0.0, 0.0, fz0});
    std::vector<Vec3> ftmp(f.size());
    std::vector<Vec3> k1(f.size()), k2(f.size()), k3(f.size()), k4(f.size());
    std::int64_t j = 0; // global step index; t = j*dt keeps drive phase exact

    auto rhs_at = [&](const std::vector<Vec3>& field, double t,
                      std::vector<Vec3>& out) {
        const double s3_base = -sp_den * std::sin(omega * t);
        for (std::size_t i = 0; i < field.size(); ++i)
            out[i] = spin_derivative(c, field[i], a3[i] * s3_base);
    };

    auto rk4_step = [&] {
        const double t0 = static_cast<double>(j) * dt;
        rhs_at(f, t0, k1);
        for (std::size_t i = 0; i < f.size(); ++i) ftmp[i] = fmadd(f[i], 0.5 * dt, k1[i]);
        rhs_at(ftmp, t0 + 0.5 * dt, k2);
        for (std::size_t i = 0; i < f.size(); ++i) ftmp[i] = fmadd(f[i], 0.5 * dt, k2[i]);
        rhs_at(ftmp, t0 + 0.5 * dt, k3);
        for (std::size_t i = 0; i < f.size(); ++i) ftmp[i] = fmadd(f[i], dt, k3[i]);
        rhs_at(ftmp, t0 + dt, k4);
        for (std::size_t i = 0; i < f.size(); ++i)
            for (int a = 0; a < 3; ++a)
                f[i][a] += dt / 6.0 * (k1[i][a] + 2.0 * k2[i][a] +
                                       2.0 * k3[i][a] + k4[i][a]);
        ++j;
    };

    auto check_finite = [&] {
        for (const Vec3& fi : f)
            if (!std::isfinite(fi[0]) || !std::isfinite(fi[1]) || !std::isfinite(fi[2])) {
                char msg[112];
                std::snprintf(msg, sizeof msg,
                              "simulate_spectrum: state diverged at omega = %.6g rad/s",
                              omega);
                throw IntegrationError(msg);
            }
    };

    auto integrate_periods = [&](std::int64_t periods) {
        for (std::int64_t p = 0; p < periods; ++p) {
            for (std::int64_t s = 0; s < n_p; ++s) rk4_step();
            check_finite();
        }
    };

    // One lock-in window over k_periods whole periods: in-phase/quadrature
    // projection of the outputs, returning the complex e^{i omega t} amplitude.
    auto demod_window = [&](std::complex<double>& s2_amp,
                            std::complex<double>& s3_amp) {
        std::complex<double> acc2{0.0, 0.0}, acc3{0.0, 0.0};
        const std::int64_t total = k_periods * n_p;
        for (std::int64_t s = 0; s < total; ++s) {
            const double t = static_cast<double>(j) * dt;
            const double phi = faraday_angle(c, f, dx, guard);
            const double ph = omega * t;
            const double s2_in = sp_den * std::cos(ph);
            const double s3_in = -sp_den * std::sin(ph);
            const double s2_out = att * (std::sin(phi) * s1_den + std::cos(phi) * s2_in);
            const double s3_out = att * s3_in;
            const std::complex<double> ref(std::cos(ph), -std::sin(ph));
            acc2 += s2_out * ref;
            acc3 += s3_out * ref;
            rk4_step();
        }
        check_finite();
        const double norm = 2.0 / static_cast<double>(total);
        s2_amp = acc2 * norm;
        s3_amp = acc3 * norm;
    };

    integrate_periods(settle_periods);
    std::int64_t settled = settle_periods;

    PointResult res;
    for (int attempt = 0;; ++attempt) {
        std::complex<double> a2, a3_amp, b2, b3_amp;
        demod_window(a2, a3_amp);
        demod_window(b2, b3_amp);
        const double mag_a = std::abs(a2) / (att * sp_den);
        const double mag_b = std::abs(b2) / (att * sp_den);
        const double drift = std::fabs(mag_b - mag_a) / std::max(mag_b, 1e-3);
        if (drift <= opt.drift_tolerance) {
            res.transmission = b2 / (att * sp_den);
            res.diag.s3_ratio = std::abs(b3_amp) / sp_den;
            res.diag.drift = drift;
            res.diag.settle_periods = static_cast<int>(settled);
            res.diag.n_cells = n_cells;
            return res;
        }
        if (attempt >= opt.max_settle_doublings) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "simulate_spectrum: demodulated amplitude still drifts "
                          "by %.3g%% at omega = %.6g rad/s",
                          100.0 * drift, omega);
            throw ConvergenceError(msg);
        }
        integrate_periods(settled); // double the total settling time
        settled *= 2;
    }
}

} // namespace

Spectrum simulate_spectrum(const CellConfig& cell, const BeamConfig& beam,
                           const std::vector<double>& grid, SimMode mode,
                           const SimOptions& options) {
    if (grid.empty())
        throw std::invalid_argument("simulate_spectrum: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("simulate_spectrum: grid must be strictly increasing");
    for (double w : grid)
        if (w == 0.0)
            throw std::invalid_argument("simulate_spectrum: omega = 0 cannot be demodulated");

    const DerivedRates rates = derive_all(cell, beam);
    if (!(rates.s_perp_in > 0))
        throw ConfigError("simulate_spectrum: zero signal power, nothing to demodulate");

    Spectrum out;
    out.metadata = rates;
    out.points.resize(grid.size());
    if (options.diagnostics) options.diagnostics->assign(grid.size(), {});

    parallel_for(grid.size(), [&](std::size_t i) {
        int n_cells = mode == SimMode::Uniform ? 1 : std::max(1, options.n_cells);
        for (int refine = 0;; ++refine) {
            try {
                const PointResult r = simulate_point(rates, grid[i], n_cells, options);
                out.points[i] = {grid[i], r.transmission};
                if (options.diagnostics) (*options.diagnostics)[i] = r.diag;
                break;
            } catch (const RefinementError&) {
                if (mode == SimMode::Uniform || refine >= options.max_cell_doublings)
                    throw;
                n_cells *= 2;
            }
        }
    });
    return out;
}

} // namespace cpsr
