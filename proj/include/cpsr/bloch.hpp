#pragma once

#include <array>
#include <vector>

#include "cpsr/config.hpp"
#include "cpsr/rates.hpp"
#include "cpsr/spectrum.hpp"

namespace cpsr {

using Vec3 = std::array<double, 3>;

// Spin and light fields sampled at N cell centers along the optical path.
// f is the local hyperfine spin density (f_x, f_y, f_z) in cm^-3; s the local
// Stokes flux density (s1, s2, s3) in photons/(s cm^2).
struct SpinLightState {
    std::vector<double> grid_x; // cell centers in [0, length_cm]
    std::vector<Vec3> f;
    std::vector<Vec3> s;
    double t = 0.0;
};

// Polarization-modulated input: s1 constant, s2 = s_perp*cos(omega t),
// s3 = -s_perp*sin(omega t). Physical modulation requires s_perp <= s1.
struct DriveWaveform {
    double omega = 0.0;     // rad/s, signed, nonzero
    double s1_in = 0.0;
    double s_perp_in = 0.0;

    Vec3 stokes_at(double t) const;
};

// Solves p*q(p) = 2*f_z/n_a for the polarization consistent with an axial
// spin density. Monotonic, so the Newton iteration always lands; |p| may
// overshoot 1 by at most 1e-3 (clamped) before it is treated as divergence.
double polarization_from_fz(Species species, double fz, double n_a_cm3);

// Light transported through a frozen spin field: attenuation e^{-d(Delta)}
// plus Faraday rotation of (s1, s2) by the accumulated angle
// sum_i (2/q_i)(Delta/Gamma) sigma f_x,i dx. s3 never rotates. A single-cell
// field uses the exact uniform closed form. With N >= 2 cells a per-cell
// rotation above 0.1 rad throws RefinementError (spin field undersampled).
struct LightField {
    std::vector<Vec3> at_cells; // path-averaged Stokes flux within each cell
    Vec3 out;                   // exit values
};
LightField propagate_light(const std::vector<Vec3>& f, const Vec3& s_in,
                           const DerivedRates& rates);

// Pumped steady state with no transverse spin, replicated over n_cells.
SpinLightState make_initial_state(const DerivedRates& rates, int n_cells);

// One explicit 4th-order step of the spin equation under a frozen Stokes
// field (one entry per cell): precession about z at omega_a, transverse decay
// gamma, axial decay gamma1, vector lightshift (2/q)(Delta/Gamma) sigma s3
// about x, and pumping sources n_a(R_pump/2 z + sigma s3 x). q, gamma_se,
// gamma, gamma1 are re-evaluated from the instantaneous polarization at every
// stage. The caller refreshes state.s between steps if it wants the light
// kept consistent. Throws IntegrationError on non-finite state.
void step_spin(SpinLightState& state, const std::vector<Vec3>& s_cells,
               double dt, const DerivedRates& rates);

enum class SimMode { Uniform, Spatial };

struct PointDiagnostics {
    double s3_ratio = 0.0;     // |s3_out/s3_in|, should equal e^{-d(Delta)}
    double drift = 0.0;        // relative amplitude change between demod windows
    int settle_periods = 0;    // modulation periods integrated before demod
    int n_cells = 0;           // grid actually used (after refinement)
};

struct SimOptions {
    int n_cells = 64;          // spatial-mode resolution (uniform mode uses 1)
    int demod_periods = 8;     // K, length of each demodulation window
    double dt_safety = 0.05;   // dt = dt_safety / fastest rate
    double dt_scale = 1.0;     // extra dt multiplier for convergence studies
    double drift_tolerance = 5e-3;
    int extra_settle_periods = 0; // added to the initial transient wait
    int max_settle_doublings = 2;
    int max_cell_doublings = 4; // refinement retries in spatial mode
    std::vector<PointDiagnostics>* diagnostics = nullptr;
};

// Drives the cell at each grid frequency, waits out the transient
// (max(10/gamma, 20 periods), extended if the demodulated amplitude still
// drifts by more than drift_tolerance between consecutive windows), then
// lock-in demodulates s2_out over demod_periods whole periods and normalizes
// by e^{-d(Delta)} s_perp. omega = 0 cannot be demodulated and is rejected.
// Throws ConvergenceError when the drift never settles and IntegrationError
// on numerical blow-up.
Spectrum simulate_spectrum(const CellConfig& cell, const BeamConfig& beam,
                           const std::vector<double>& grid,
                           SimMode mode = SimMode::Uniform,
                           const SimOptions& options = {});

} // namespace cpsr
