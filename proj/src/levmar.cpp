#include "cpsr/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace cpsr {

namespace {

// Gaussian elimination with partial pivoting; returns false if singular.
bool solve_linear(std::vector<double> a, std::vector<double> b,
                  std::vector<double>& x, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::fabs(a[row * n + col]) > std::fabs(a[piv * n + col])) piv = row;
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double m = a[row * n + col] / a[col * n + col];
            if (m == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row * n + k] -= m * a[col * n + k];
            b[row] -= m * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return true;
}

bool invert_matrix(const std::vector<double>& a, std::vector<double>& inv,
                   std::size_t n) {
    inv.assign(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> e(n, 0.0), x;
        e[col] = 1.0;
        if (!solve_linear(a, e, x, n)) return false;
        for (std::size_t row = 0; row < n; ++row) inv[row * n + col] = x[row];
    }
    return true;
}

double sum_squares(const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

void jacobian_forward(const ResidualFn& fn, const std::vector<double>& p,
                      const std::vector<double>& r0, std::vector<double>& jac,
                      std::vector<double>& scratch) {
    const std::size_t n = r0.size(), np = p.size();
    jac.assign(n * np, 0.0);
    std::vector<double> pp = p;
    for (std::size_t j = 0; j < np; ++j) {
        const double h = 1e-7 * std::fabs(p[j]) + 1e-10;
        pp[j] = p[j] + h;
        fn(pp, scratch);
        pp[j] = p[j];
        for (std::size_t i = 0; i < n; ++i) jac[i * np + j] = (scratch[i] - r0[i]) / h;
    }
}

} // namespace

LevmarResult fit_damped_least_squares(const ResidualFn& fn,
                                      std::vector<double> p0,
                                      std::size_t n_residuals,
                                      const LevmarOptions& opt) {
    const std::size_t np = p0.size();
    if (np == 0 || n_residuals < np)
        throw std::invalid_argument("fit_damped_least_squares: need at least as "
                                    "many residuals as parameters");

    std::vector<double> r(n_residuals), r_try(n_residuals), scratch(n_residuals);
    std::vector<double> jac, jtj(np * np), jtr(np), step, p_try(np);

    fn(p0, r);
    double cost = sum_squares(r);
    if (!std::isfinite(cost))
        throw std::invalid_argument("fit_damped_least_squares: initial residual not finite");

    LevmarResult res;
    res.params = p0;
    double lambda = opt.initial_damping;

    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        jacobian_forward(fn, res.params, r, jac, scratch);
        for (std::size_t a = 0; a < np; ++a) {
            for (std::size_t b = 0; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i)
                    s += jac[i * np + a] * jac[i * np + b];
                jtj[a * np + b] = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n_residuals; ++i) s += jac[i * np + a] * r[i];
            jtr[a] = s;
        }

        // Inner loop: raise damping until a step that lowers the cost appears.
        bool stepped = false;
        while (lambda < 1e12) {
            std::vector<double> m = jtj;
            for (std::size_t a = 0; a < np; ++a) {
                const double d = jtj[a * np + a];
                m[a * np + a] += lambda * (d > 0 ? d : 1.0);
            }
            std::vector<double> rhs(np);
            for (std::size_t a = 0; a < np; ++a) rhs[a] = -jtr[a];
            if (!solve_linear(m, rhs, step, np)) {
                lambda *= opt.damping_up;
                continue;
            }
            for (std::size_t a = 0; a < np; ++a) p_try[a] = res.params[a] + step[a];
            fn(p_try, r_try);
            const double cost_try = sum_squares(r_try);
            if (std::isfinite(cost_try) && cost_try <= cost) {
                double rel = 0.0;
                for (std::size_t a = 0; a < np; ++a) {
                    const double scale = std::fabs(res.params[a]) + 1e-30;
                    rel = std::max(rel, std::fabs(step[a]) / scale);
                }
                // the relative-step test alone stalls on parameters whose
                // true value is zero, so a stagnating cost also terminates
                const double reduction = cost - cost_try;
                res.params = p_try;
                r = r_try;
                cost = cost_try;
                lambda /= opt.damping_down;
                if (lambda < 1e-12) lambda = 1e-12;
                stepped = true;
                if (rel < opt.step_tolerance ||
                    reduction <= opt.cost_tolerance * cost)
                    res.converged = true;
                break;
            }
            lambda *= opt.damping_up;
        }
        if (!stepped) {
            // No downhill direction at any damping: a (possibly flat) minimum.
            res.converged = true;
        }
        if (res.converged) break;
    }
    res.iterations = iter + 1;
    res.rms = std::sqrt(cost / static_cast<double>(n_residuals));

    if (n_residuals > np) {
        // Fresh Jacobian at the optimum for the covariance estimate.
        jacobian_forward(fn, res.params, r, jac, scratch);
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = 0; b < np; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_residuals; ++i)
                    s += jac[i * np + a] * jac[i * np + b];
                jtj[a * np + b] = s;
            }
        std::vector<double> inv;
        if (invert_matrix(jtj, inv, np)) {
            const double sigma2 = cost / static_cast<double>(n_residuals - np);
            for (double& v : inv) v *= sigma2;
            res.covariance = std::move(inv);
        }
    }
    return res;
}

} // namespace cpsr
