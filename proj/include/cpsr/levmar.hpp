#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cpsr {

// Residual callback: fill r (fixed length) from parameter vector p.
using ResidualFn =
    std::function<void(const std::vector<double>& p, std::vector<double>& r)>;

struct LevmarOptions {
    int max_iterations = 200;
    double initial_damping = 1e-3;
    double damping_up = 10.0;    // applied when a step increases the residual
    double damping_down = 10.0;  // applied when a step decreases it
    double step_tolerance = 1e-8; // relative step size declaring convergence
    double cost_tolerance = 1e-12; // relative cost reduction declaring convergence
};

struct LevmarResult {
    std::vector<double> params;
    std::vector<double> covariance; // p x p, row-major; empty if not computable
    double rms = 0.0;               // final RMS residual
    int iterations = 0;
    bool converged = false;
};

// Damped least squares with a fixed multiplicative damping schedule and a
// forward-difference Jacobian. Deterministic: no randomized restarts.
LevmarResult fit_damped_least_squares(const ResidualFn& fn,
                                      std::vector<double> p0,
                                      std::size_t n_residuals,
                                      const LevmarOptions& opt = {});

} // namespace cpsr
