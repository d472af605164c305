#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "cpsr/bloch.hpp"
#include "cpsr/config.hpp"
#include "cpsr/constants.hpp"
#include "cpsr/errors.hpp"
#include "cpsr/rates.hpp"

using namespace cpsr;

namespace {

CellConfig rb_cell() {
    CellConfig c;
    c.species = Species::RbNatural;
    c.temperature_k = 154.0 + 273.15;
    c.length_cm = 1.0;
    c.area_cm2 = 1.0;
    c.gamma_opt_ghz = 2.6;
    c.wavelength_nm = 795.0;
    return c;
}

BeamConfig rb_beam() {
    BeamConfig b;
    b.p_control_mw = 15.2;
    b.p_signal_mw = 0.02;
    b.delta_ghz = 89.0;
    b.p_pump_mw = 60.0;
    b.delta_pump_ghz = 45.0;
    b.omega_a = hz_to_rad(268.0);
    b.r_sd = hz_to_rad(98.0);
    return b;
}

// simple deterministic generator for reproducible pseudo-random fields
struct Lcg {
    std::uint64_t s = 0x9e3779b97f4a7c15ull;
    double next() { // uniform in [0, 1)
        s = s * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(s >> 11) * 0x1.0p-53;
    }
};

// transmission of the uniform cell linearized around the pumped steady state;
// includes the probe-pumping channel on top of the coherent coupling
std::complex<double> linearized_transmission(double omega, const DerivedRates& r) {
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> wg = omega - i * r.gamma;
    const double pp = r.k_al * (1.0 - std::exp(-r.d_delta));
    return 1.0 - (i * r.omega_coupling * r.omega_a + pp * wg) /
                     (r.omega_a * r.omega_a - wg * wg);
}

} // namespace

TEST_CASE("axial polarization recovery round-trips") {
    const double n_a = 1.228524e14;
    for (Species sp : {Species::RbNatural, Species::K}) {
        for (double p : {0.0, 0.05, 0.3, 0.52, 0.766, 0.95, -0.4, -0.9}) {
            const double fz =
                0.5 * slowing_down_factor(sp, p) * n_a * p;
            CHECK(polarization_from_fz(sp, fz, n_a) ==
                  doctest::Approx(p).epsilon(1e-9));
        }
    }
    // beyond the physical ceiling
    const double fz_max = 0.5 * slowing_down_factor(Species::K, 1.0) * n_a;
    CHECK_THROWS_AS(polarization_from_fz(Species::K, 1.01 * fz_max, n_a),
                    IntegrationError);
}

TEST_CASE("light propagation with no transverse spin only attenuates") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    const double att = std::exp(-r.d_delta);
    const Vec3 s_in{r.s1_in, 0.2 * r.s_perp_in, -0.4 * r.s_perp_in};

    for (int n : {1, 8}) {
        std::vector<Vec3> f(static_cast<std::size_t>(n),
                            Vec3{0.0, 0.0, 3.0e13});
        const LightField lf = propagate_light(f, s_in, r);
        for (int k = 0; k < 3; ++k)
            CHECK(lf.out[static_cast<std::size_t>(k)] ==
                  doctest::Approx(att * s_in[static_cast<std::size_t>(k)])
                      .epsilon(1e-12));
    }

    // single-cell path average of a pure-attenuation profile
    std::vector<Vec3> f1{Vec3{0.0, 0.0, 0.0}};
    const LightField lf = propagate_light(f1, s_in, r);
    const double u = (1.0 - att) / r.d_delta;
    CHECK(lf.at_cells[0][0] == doctest::Approx(u * s_in[0]).epsilon(1e-12));
    CHECK(lf.at_cells[0][2] == doctest::Approx(u * s_in[2]).epsilon(1e-12));
}

TEST_CASE("small transverse spin rotates the polarization linearly") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    const double fx = 1.0e10;
    const double phi = (2.0 / r.q) * r.delta_over_gamma * r.sigma_delta_cm2 *
                       fx * r.length_cm;
    // the rotation uses the slowing factor of the local f_z, so place the
    // cell at the pumped equilibrium where that factor is exactly r.q
    const double fz_eq = 0.5 * r.n_a_cm3 * r.p_a * r.q;
    std::vector<Vec3> f{Vec3{fx, 0.0, fz_eq}};
    const Vec3 s_in{r.s1_in, 0.0, 0.0};
    const LightField lf = propagate_light(f, s_in, r);
    const double att = std::exp(-r.d_delta);
    CHECK(lf.out[1] == doctest::Approx(att * r.s1_in * std::sin(phi)).epsilon(1e-9));
    CHECK(lf.out[0] == doctest::Approx(att * r.s1_in * std::cos(phi)).epsilon(1e-12));
}

TEST_CASE("circular component is blind to the spin profile") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    const double att = std::exp(-r.d_delta);
    const Vec3 s_in{r.s1_in, 0.0, 0.7 * r.s_perp_in};

    Lcg rng;
    std::vector<Vec3> fa(16), fb(16);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        fa[i] = Vec3{2.0e11 * (rng.next() - 0.5), 0.0, 3.0e13 * rng.next()};
        fb[i] = Vec3{2.0e11 * (rng.next() - 0.5), 0.0, 3.0e13 * rng.next()};
    }
    const LightField la = propagate_light(fa, s_in, r);
    const LightField lb = propagate_light(fb, s_in, r);
    CHECK(la.out[2] == doctest::Approx(att * s_in[2]).epsilon(1e-12));
    CHECK(la.out[2] == doctest::Approx(lb.out[2]).epsilon(1e-12));
    CHECK(la.out[1] != lb.out[1]); // rotation does depend on the profile
}

TEST_CASE("excessive per-cell rotation is rejected") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    std::vector<Vec3> f(4, Vec3{1.0e15, 0.0, 0.0});
    const Vec3 s_in{r.s1_in, 0.0, 0.0};
    CHECK_THROWS_AS(propagate_light(f, s_in, r), RefinementError);
}

TEST_CASE("free spin precesses and decays at the derived rates") {
    BeamConfig b = rb_beam();
    b.p_pump_mw = 0.0; // no pumping: polarization stays at zero
    const DerivedRates r = derive_all(rb_cell(), b);

    SpinLightState st = make_initial_state(r, 1);
    CHECK(st.f[0][2] == 0.0);
    const double fx0 = 1.0e10;
    st.f[0] = Vec3{fx0, 0.0, 0.0};
    const std::vector<Vec3> dark{Vec3{0.0, 0.0, 0.0}};

    const double period = TWO_PI / r.omega_a;
    const int steps = 400;
    const double dt = period / steps;
    for (int i = 0; i < 2 * steps; ++i) step_spin(st, dark, dt, r);

    const double t = 2 * steps * dt;
    const double env = fx0 * std::exp(-r.gamma * t);
    // tolerances scale with the envelope: the sine lands near a zero where a
    // relative comparison is meaningless
    CHECK(std::fabs(st.f[0][0] - env * std::cos(r.omega_a * t)) < 1e-5 * env);
    CHECK(std::fabs(st.f[0][1] + env * std::sin(r.omega_a * t)) < 1e-5 * env);
    CHECK(st.f[0][2] == doctest::Approx(0.0));
    CHECK(st.t == doctest::Approx(t).epsilon(1e-12));
}

TEST_CASE("pumping drives the spin to the derived polarization") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    SpinLightState st = make_initial_state(r, 1);
    st.f[0] = Vec3{0.0, 0.0, 0.0}; // start unpolarized
    const std::vector<Vec3> dark{Vec3{0.0, 0.0, 0.0}};

    const double gamma1_min = (r.r_sd + r.r_pump) /
                              slowing_down_factor(r.species, 0.0);
    const double horizon = 20.0 / gamma1_min;
    const double dt = 0.02 / r.omega_a;
    const auto n = static_cast<std::int64_t>(horizon / dt);
    for (std::int64_t i = 0; i < n; ++i) step_spin(st, dark, dt, r);

    const double fz_target = 0.5 * r.q * r.n_a_cm3 * r.p_a;
    CHECK(st.f[0][2] == doctest::Approx(fz_target).epsilon(1e-3));
    CHECK(polarization_from_fz(r.species, st.f[0][2], r.n_a_cm3) ==
          doctest::Approx(r.p_a).epsilon(1e-3));
}

TEST_CASE("static circular light settles onto the algebraic fixed point") {
    BeamConfig b = rb_beam();
    b.p_pump_mw = 0.0;
    const DerivedRates r = derive_all(rb_cell(), b);

    const double s3 = 1.0e13;
    const std::vector<Vec3> light{Vec3{r.s1_in, 0.0, s3}};
    SpinLightState st = make_initial_state(r, 1);

    const double dt = 0.02 / r.omega_a;
    const auto n = static_cast<std::int64_t>(60.0 / r.gamma / dt);
    for (std::int64_t i = 0; i < n; ++i) step_spin(st, light, dt, r);

    // reconstruct the coefficient matrix at the converged polarization and
    // solve the stationary equations directly
    const double p = polarization_from_fz(r.species, st.f[0][2], r.n_a_cm3);
    const double q = slowing_down_factor(r.species, p);
    const double g1 = (r.r_sd + r.r_pump) / q;
    const double g = g1 + serf_broadening(r.omega_a, r.r_se, r.species, p);
    const double lshift = (2.0 / q) * r.delta_over_gamma * r.sigma_delta_cm2 * s3;
    const double src = r.n_a_cm3 * r.sigma_delta_cm2 * s3;

    // g*fx = wa*fy + src; g*fy = -wa*fx - lshift*fz; g1*fz = lshift*fy
    const double wa = r.omega_a;
    const double denom =
        g * (g * g1 + lshift * lshift) + wa * wa * g1;
    const double fy = -src * wa * g1 / denom;
    const double fz = lshift * fy / g1;
    const double fx = (wa * fy + src) / g;

    CHECK(st.f[0][0] == doctest::Approx(fx).epsilon(1e-6));
    CHECK(st.f[0][1] == doctest::Approx(fy).epsilon(1e-6));
    CHECK(st.f[0][2] == doctest::Approx(fz).epsilon(1e-6));
}

TEST_CASE("non-finite integration is caught") {
    const DerivedRates r = derive_all(rb_cell(), rb_beam());
    SpinLightState st = make_initial_state(r, 1);
    const std::vector<Vec3> dark{Vec3{0.0, 0.0, 0.0}};
    CHECK_THROWS_AS(step_spin(st, dark, 1.0e308, r), IntegrationError);
}

TEST_CASE("driven cell reproduces the linearized response") {
    const CellConfig cell = rb_cell();
    BeamConfig beam = rb_beam();
    beam.p_signal_mw = 2.0e-4; // weak drive keeps the response linear
    const DerivedRates r = derive_all(cell, beam);

    const double wr = std::hypot(r.omega_a, r.gamma);
    const std::vector<double> grid{-wr,           wr - 2.0 * r.gamma,
                                   wr - r.gamma,  wr,
                                   wr + r.gamma,  wr + 2.0 * r.gamma,
                                   wr + 6.0 * r.gamma};
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());

    const Spectrum s = simulate_spectrum(cell, beam, sorted, SimMode::Uniform);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const std::complex<double> expect =
            linearized_transmission(sorted[i], r);
        CHECK(std::abs(s.points[i].transmission - expect) < 1e-2);
    }

    // absorption on the positive branch, gain on the mirror branch
    const double t_gain = std::abs(s.points[0].transmission);
    CHECK(t_gain > 1.0);
    double t_min = 1e300;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        t_min = std::min(t_min, std::abs(s.points[i].transmission));
    CHECK(t_min < 1.0);
}

TEST_CASE("uniform and spatially resolved modes agree at low depth") {
    CellConfig cell = rb_cell();
    cell.temperature_k = 373.15; // thin vapor, optical depth ~ 6e-3
    const BeamConfig beam = rb_beam();
    const DerivedRates r = derive_all(cell, beam);
    CHECK(r.d_delta < 0.01);

    const double wr = std::hypot(r.omega_a, r.gamma);
    const std::vector<double> grid{wr - r.gamma, wr, wr + r.gamma};

    SimOptions opt;
    opt.n_cells = 8;
    const Spectrum su = simulate_spectrum(cell, beam, grid, SimMode::Uniform);
    const Spectrum ss =
        simulate_spectrum(cell, beam, grid, SimMode::Spatial, opt);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(su.points[i].transmission - ss.points[i].transmission) <
              1e-2);
}

TEST_CASE("time step refinement is converged") {
    const CellConfig cell = rb_cell();
    const BeamConfig beam = rb_beam();
    const DerivedRates r = derive_all(cell, beam);
    const std::vector<double> grid{std::hypot(r.omega_a, r.gamma)};

    SimOptions coarse, fine;
    fine.dt_scale = 0.5;
    const auto a =
        simulate_spectrum(cell, beam, grid, SimMode::Uniform, coarse);
    const auto b = simulate_spectrum(cell, beam, grid, SimMode::Uniform, fine);
    CHECK(std::abs(a.points[0].transmission - b.points[0].transmission) <
          2e-3);
}

TEST_CASE("demodulation is insensitive to extra settling time") {
    const CellConfig cell = rb_cell();
    const BeamConfig beam = rb_beam();
    const DerivedRates r = derive_all(cell, beam);
    const std::vector<double> grid{r.omega_a};

    SimOptions base, shifted;
    shifted.extra_settle_periods = 3;
    const auto a = simulate_spectrum(cell, beam, grid, SimMode::Uniform, base);
    const auto b =
        simulate_spectrum(cell, beam, grid, SimMode::Uniform, shifted);
    CHECK(std::abs(a.points[0].transmission - b.points[0].transmission) <
          1e-2);
}

TEST_CASE("circular attenuation diagnostic matches the optical depth") {
    const CellConfig cell = rb_cell();
    const BeamConfig beam = rb_beam();
    const DerivedRates r = derive_all(cell, beam);

    std::vector<PointDiagnostics> diag;
    SimOptions opt;
    opt.diagnostics = &diag;
    const std::vector<double> grid{r.omega_a};
    simulate_spectrum(cell, beam, grid, SimMode::Uniform, opt);
    REQUIRE(diag.size() == 1);
    CHECK(diag[0].s3_ratio ==
          doctest::Approx(std::exp(-r.d_delta)).epsilon(1e-9));
    CHECK(diag[0].drift < 5e-3);
    CHECK(diag[0].n_cells == 1);
}

TEST_CASE("grid and drive validation") {
    const CellConfig cell = rb_cell();
    const BeamConfig beam = rb_beam();

    CHECK_THROWS_AS(simulate_spectrum(cell, beam, {}), std::invalid_argument);
    CHECK_THROWS_AS(simulate_spectrum(cell, beam, {-100.0, 0.0, 100.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_spectrum(cell, beam, {200.0, 100.0}),
                    std::invalid_argument);

    BeamConfig dark = beam;
    dark.p_signal_mw = 0.0;
    CHECK_THROWS_AS(simulate_spectrum(cell, dark, {100.0}), ConfigError);
}

TEST_CASE("unreachable drift tolerance reports non-convergence") {
    const CellConfig cell = rb_cell();
    const BeamConfig beam = rb_beam();
    SimOptions opt;
    opt.drift_tolerance = 1e-30;
    opt.max_settle_doublings = 0;
    CHECK_THROWS_AS(
        simulate_spectrum(cell, beam, {hz_to_rad(268.0)}, SimMode::Uniform, opt),
        ConvergenceError);
}
