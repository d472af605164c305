#include "cpsr/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cpsr/analytic.hpp"
#include "cpsr/errors.hpp"
#include "cpsr/levmar.hpp"

namespace cpsr {

namespace {

constexpr double NAN_D = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

HyperfineLineList parse_line_list(const std::string& text) {
    HyperfineLineList list;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    double sum = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        double off, w;
        if (!(row >> off)) continue; // blank or comment-only
        if (!(row >> w)) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "line list: missing strength on line %d", line_no);
            throw DataError(msg);
        }
        std::string tail;
        if (row >> tail) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "line list: trailing token on line %d", line_no);
            throw DataError(msg);
        }
        if (!std::isfinite(off) || !(w > 0)) {
            char msg[96];
            std::snprintf(msg, sizeof msg,
                          "line list: bad entry on line %d", line_no);
            throw DataError(msg);
        }
        list.lines.push_back({off, w});
        sum += w;
    }
    if (list.lines.empty()) throw DataError("line list: no transitions found");
    for (auto& l : list.lines) l.strength /= sum;
    return list;
}

HyperfineLineList load_line_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("line list: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_line_list(buf.str());
}

double one_photon_depth(double nu_ghz, double od, double gamma_ghz,
                        const HyperfineLineList& lines) {
    if (lines.lines.empty())
        throw std::domain_error("one_photon_depth: empty line list");
    if (!(gamma_ghz > 0))
        throw std::domain_error("one_photon_depth: gamma must be positive");
    double acc = 0.0;
    for (const auto& l : lines.lines) {
        const double x = (nu_ghz - l.offset_ghz) / gamma_ghz;
        acc += l.strength / (1.0 + x * x);
    }
    return od * acc;
}

std::vector<double> one_photon_model(const std::vector<double>& nu_ghz,
                                     double od, double gamma_ghz,
                                     const HyperfineLineList& lines) {
    std::vector<double> out;
    out.reserve(nu_ghz.size());
    for (double nu : nu_ghz) out.push_back(one_photon_depth(nu, od, gamma_ghz, lines));
    return out;
}

AbsorptionFit fit_one_photon(const std::vector<std::pair<double, double>>& data,
                             const HyperfineLineList& lines) {
    if (lines.lines.empty())
        throw std::domain_error("fit_one_photon: empty line list");
    if (data.size() < 10)
        throw DataError("fit_one_photon: need at least 10 data points");
    for (const auto& [nu, p] : data) {
        (void)nu;
        if (!(p > 0)) throw DataError("fit_one_photon: non-positive power");
    }

    // Work in optical-depth space relative to the largest power.
    const double p_max =
        std::max_element(data.begin(), data.end(), [](auto& a, auto& b) {
            return a.second < b.second;
        })->second;
    std::vector<double> nu(data.size()), od_obs(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        nu[i] = data[i].first;
        od_obs[i] = -std::log(data[i].second / p_max);
    }

    // Initial guesses: depth from the deepest point, width from the
    // half-prominence span of the observed depth curve.
    std::size_t i_peak = 0;
    for (std::size_t i = 1; i < od_obs.size(); ++i)
        if (od_obs[i] > od_obs[i_peak]) i_peak = i;
    const double od0 = std::max(od_obs[i_peak], 1e-6);
    const double span =
        *std::max_element(nu.begin(), nu.end()) - *std::min_element(nu.begin(), nu.end());
    double gamma0 = span / 8.0;
    {
        const double level = 0.5 * od_obs[i_peak];
        double left = NAN_D, right = NAN_D;
        for (std::size_t i = i_peak; i-- > 0;)
            if (od_obs[i] <= level) { left = nu[i]; break; }
        for (std::size_t i = i_peak + 1; i < nu.size(); ++i)
            if (od_obs[i] <= level) { right = nu[i]; break; }
        if (std::isfinite(left) && std::isfinite(right) && right > left)
            gamma0 = 0.5 * (right - left);
    }

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double od = p[0], g = p[1], ln_pref = p[2];
        if (!(g > 0) || !(od > 0)) {
            std::fill(r.begin(), r.end(), 1e6 * (1.0 + std::fabs(g) + std::fabs(od)));
            return;
        }
        for (std::size_t i = 0; i < nu.size(); ++i)
            r[i] = (od_obs[i] + ln_pref) - one_photon_depth(nu[i], od, g, lines);
    };

    LevmarResult res = fit_damped_least_squares(
        residuals, {od0, gamma0, 0.0}, data.size());
    if (!res.converged) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "fit_one_photon: no convergence after %d iterations "
                      "(rms %.3g)", res.iterations, res.rms);
        throw FitError(msg);
    }
    if (!(res.params[0] > 0) || !(res.params[1] > 0))
        throw FitError("fit_one_photon: optimum is unphysical (od or gamma <= 0)");

    AbsorptionFit fit;
    fit.od = res.params[0];
    fit.gamma_opt_ghz = res.params[1];
    fit.residual = res.rms;
    fit.iterations = res.iterations;
    if (!res.covariance.empty()) {
        // (od, gamma) block of the 3x3 covariance.
        fit.covariance[0] = res.covariance[0];
        fit.covariance[1] = res.covariance[1];
        fit.covariance[2] = res.covariance[3];
        fit.covariance[3] = res.covariance[4];
    }
    return fit;
}

namespace {

// Full width of the extremum at the given level, by linear interpolation;
// NaN when a crossing runs off the grid.
double crossing_width(const std::vector<double>& w, const std::vector<double>& y,
                      std::size_t i0, double level, bool rising_away) {
    // rising_away: y grows away from the extremum (absorption dip).
    double left = NAN_D, right = NAN_D;
    for (std::size_t i = i0; i-- > 0;) {
        const bool crossed = rising_away ? y[i] >= level : y[i] <= level;
        if (crossed) {
            const double t = (level - y[i]) / (y[i + 1] - y[i]);
            left = w[i] + t * (w[i + 1] - w[i]);
            break;
        }
    }
    for (std::size_t i = i0 + 1; i < y.size(); ++i) {
        const bool crossed = rising_away ? y[i] >= level : y[i] <= level;
        if (crossed) {
            const double t = (level - y[i - 1]) / (y[i] - y[i - 1]);
            right = w[i - 1] + t * (w[i] - w[i - 1]);
            break;
        }
    }
    if (std::isfinite(left) && std::isfinite(right) && right > left)
        return right - left;
    return NAN_D;
}

} // namespace

CpsrLineFit fit_cpsr_line(const Spectrum& spec) {
    const std::size_t n = spec.points.size();
    if (n < 12) throw FitError("fit_cpsr_line: too few points (need >= 12)");

    std::vector<double> w(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = spec.points[i].omega;
        y[i] = std::abs(spec.points[i].transmission);
    }

    // Baseline from the outer wings (first and last tenth of the grid).
    std::vector<double> wing;
    const std::size_t tail = std::max<std::size_t>(2, n / 10);
    for (std::size_t i = 0; i < tail; ++i) wing.push_back(y[i]);
    for (std::size_t i = n - tail; i < n; ++i) wing.push_back(y[i]);
    const double baseline0 = median_of(wing);

    std::size_t i_min = 0, i_max = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (y[i] < y[i_min]) i_min = i;
        if (y[i] > y[i_max]) i_max = i;
    }
    const double prom_abs = baseline0 - y[i_min];
    const double prom_gain = y[i_max] - baseline0;
    const double scale = std::max(1.0, std::fabs(baseline0));
    if (std::max(prom_abs, prom_gain) <= 1e-12 * scale)
        throw FitError("fit_cpsr_line: no extremum found");

    const double raw_abs =
        prom_abs > 0 ? crossing_width(w, y, i_min, y[i_min] + 0.5 * prom_abs, true)
                     : NAN_D;
    const double raw_gain =
        prom_gain > 0 ? crossing_width(w, y, i_max, y[i_max] - 0.5 * prom_gain, false)
                      : NAN_D;

    // Starting point: centers from the extrema, width from the sharper one.
    double omega_a0;
    if (prom_abs > 1e-12 * scale && prom_gain > 1e-12 * scale)
        omega_a0 = 0.5 * (std::fabs(w[i_min]) + std::fabs(w[i_max]));
    else
        omega_a0 = prom_abs >= prom_gain ? std::fabs(w[i_min]) : std::fabs(w[i_max]);
    double width0 = prom_abs >= prom_gain ? raw_abs : raw_gain;
    if (!std::isfinite(width0) || width0 <= 0) width0 = (w.back() - w.front()) / 20.0;
    const double gamma0 = 0.5 * width0;
    const double omega0 = 2.0 * gamma0 * std::max(prom_abs, prom_gain);
    const double b0 = baseline0 - 1.0;

    auto residuals = [&](const std::vector<double>& p, std::vector<double>& r) {
        const double om = p[0], wa = p[1], g = p[2], b = p[3];
        if (!(g > 0)) {
            std::fill(r.begin(), r.end(), 1e6 * (1.0 + std::fabs(g)));
            return;
        }
        for (std::size_t i = 0; i < n; ++i)
            r[i] = std::abs(1.0 - complex_contrast(w[i], om, wa, g)) + b - y[i];
    };

    LevmarResult res = fit_damped_least_squares(
        residuals, {omega0, omega_a0, gamma0, b0}, n);
    if (!res.converged) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "fit_cpsr_line: no convergence after %d iterations "
                      "(rms %.3g)", res.iterations, res.rms);
        throw FitError(msg);
    }

    CpsrLineFit fit;
    fit.omega_coupling = res.params[0];
    fit.omega_a = res.params[1];
    fit.gamma = res.params[2];
    fit.baseline = res.params[3];
    if (!res.covariance.empty()) {
        fit.omega_coupling_err = std::sqrt(std::max(0.0, res.covariance[0]));
        fit.omega_a_err = std::sqrt(std::max(0.0, res.covariance[5]));
        fit.gamma_err = std::sqrt(std::max(0.0, res.covariance[10]));
        fit.baseline_err = std::sqrt(std::max(0.0, res.covariance[15]));
    }
    fit.iterations = res.iterations;

    const double wa = fit.omega_a, g = fit.gamma;
    const double wr = std::sqrt(wa * wa + g * g);
    const double contrast =
        std::fabs(fit.omega_coupling) * wa / (2.0 * g * wr);
    // Positive coupling puts the absorption dip at positive detuning.
    const double abs_center = fit.omega_coupling >= 0 ? wr : -wr;
    fit.absorption = {abs_center, 2.0 * g, contrast, false, res.rms};
    fit.gain = {-abs_center, 2.0 * g, contrast, true, res.rms};
    fit.extremum_contrast_absorption = 1.0 - y[i_min];
    fit.extremum_contrast_gain = y[i_max] - 1.0;
    fit.raw_width_absorption = raw_abs;
    fit.raw_width_gain = raw_gain;
    return fit;
}

} // namespace cpsr
