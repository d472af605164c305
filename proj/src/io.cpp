#include "cpsr/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cpsr/errors.hpp"

namespace cpsr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_number(const std::string& text, const std::string& key, int line_no) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "parse error: line %d: bad number for key '%s'",
                      line_no, key.c_str());
        throw ConfigError(msg);
    }
    return v;
}

// key -> (line, raw value) pairs of a flat config document.
std::map<std::string, std::pair<int, std::string>> tokenize(const std::string& text) {
    std::map<std::string, std::pair<int, std::string>> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "parse error: line %d: expected key = value",
                          line_no);
            throw ConfigError(msg);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "parse error: line %d: empty key or value",
                          line_no);
            throw ConfigError(msg);
        }
        if (kv.count(key)) {
            char msg[128];
            std::snprintf(msg, sizeof msg, "parse error: line %d: duplicate key '%s'",
                          line_no, key.c_str());
            throw ConfigError(msg);
        }
        kv[key] = {line_no, val};
    }
    return kv;
}

const std::set<std::string> CONFIG_KEYS = {
    "species",        "temperature_c", "temperature_k", "length_cm",
    "area_cm2",       "gamma_opt_ghz", "wavelength_nm", "p_control_mw",
    "p_signal_mw",    "delta_ghz",     "p_pump_mw",     "delta_pump_ghz",
    "omega_a_hz",     "r_sd_hz",       "f_osc",         "sigma_se_cm2",
};

} // namespace

ParsedConfig parse_config(const std::string& text) {
    auto kv = tokenize(text);
    for (const auto& [key, v] : kv) {
        if (!CONFIG_KEYS.count(key)) {
            char msg[128];
            std::snprintf(msg, sizeof msg, "unknown key: %s (line %d)", key.c_str(),
                          v.first);
            throw ConfigError(msg);
        }
    }

    auto take = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing key: " + key);
        return it->second.second;
    };
    auto take_num = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigError("missing key: " + key);
        return parse_number(it->second.second, key, it->second.first);
    };

    ParsedConfig pc;
    pc.cell.species = species_from_name(take("species"));
    const bool has_c = kv.count("temperature_c"), has_k = kv.count("temperature_k");
    if (has_c && has_k)
        throw ConfigError("give either temperature_c or temperature_k, not both");
    if (has_k)
        pc.cell.temperature_k = take_num("temperature_k");
    else
        pc.cell.temperature_k = take_num("temperature_c") + 273.15;
    pc.cell.length_cm = take_num("length_cm");
    pc.cell.area_cm2 = take_num("area_cm2");
    pc.cell.gamma_opt_ghz = take_num("gamma_opt_ghz");
    pc.cell.wavelength_nm = take_num("wavelength_nm");
    if (kv.count("f_osc")) pc.cell.f_osc = take_num("f_osc");
    if (kv.count("sigma_se_cm2")) pc.cell.sigma_se_cm2 = take_num("sigma_se_cm2");

    pc.beam.p_control_mw = take_num("p_control_mw");
    pc.beam.p_signal_mw = take_num("p_signal_mw");
    pc.beam.delta_ghz = take_num("delta_ghz");
    pc.beam.p_pump_mw = take_num("p_pump_mw");
    pc.beam.delta_pump_ghz = take_num("delta_pump_ghz");
    pc.beam.omega_a = hz_to_rad(take_num("omega_a_hz"));
    pc.beam.r_sd = hz_to_rad(take_num("r_sd_hz"));

    validate(pc.cell, &pc.warnings);
    validate(pc.beam, &pc.warnings);
    return pc;
}

ParsedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spec) {
    out << "omega_hz,re_t,im_t,abs_t,phase_deg\n";
    for (const auto& p : spec.points) {
        const double deg = std::arg(p.transmission) * 180.0 / (0.5 * TWO_PI);
        out << fmt9(rad_to_hz(p.omega)) << ',' << fmt9(p.transmission.real()) << ','
            << fmt9(p.transmission.imag()) << ',' << fmt9(std::abs(p.transmission))
            << ',' << fmt9(deg) << '\n';
    }
}

namespace {

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void report_line(std::ostringstream& out, const char* key, double value,
                 const char* unit, bool hz_note) {
    out << key << " = " << exact(value) << "  # " << unit;
    if (hz_note) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.9g", value / TWO_PI);
        out << ", = " << buf << " Hz";
    }
    out << '\n';
}

} // namespace

std::string params_report(const DerivedRates& r) {
    std::ostringstream out;
    out << "# derived rates; spin rates are angular (rad/s) and the quoted Hz\n"
           "# equivalents follow the convention Hz == 2*pi/s\n";
    out << "species = " << species_name(r.species) << '\n';
    report_line(out, "n_a_cm3", r.n_a_cm3, "cm^-3", false);
    report_line(out, "sigma0_cm2", r.sigma0_cm2, "cm^2", false);
    report_line(out, "sigma_delta_cm2", r.sigma_delta_cm2, "cm^2", false);
    report_line(out, "d0", r.d0, "dimensionless", false);
    report_line(out, "d_delta", r.d_delta, "dimensionless", false);
    report_line(out, "q", r.q, "dimensionless", false);
    report_line(out, "p_a", r.p_a, "dimensionless", false);
    report_line(out, "r_se", r.r_se, "rad/s", true);
    report_line(out, "r_pump", r.r_pump, "rad/s", true);
    report_line(out, "r_c", r.r_c, "rad/s", true);
    report_line(out, "gamma_se", r.gamma_se, "rad/s", true);
    report_line(out, "gamma1", r.gamma1, "rad/s", true);
    report_line(out, "gamma", r.gamma, "rad/s", true);
    report_line(out, "s1_in", r.s1_in, "photons/s", false);
    report_line(out, "s_perp_in", r.s_perp_in, "photons/s", false);
    report_line(out, "k_la", r.k_la, "dimensionless", false);
    report_line(out, "k_al", r.k_al, "rad/s", true);
    report_line(out, "omega_coupling", r.omega_coupling, "rad/s", true);
    report_line(out, "omega_a", r.omega_a, "rad/s", true);
    report_line(out, "r_sd", r.r_sd, "rad/s", true);
    report_line(out, "delta_over_gamma", r.delta_over_gamma, "dimensionless", false);
    report_line(out, "length_cm", r.length_cm, "cm", false);
    report_line(out, "area_cm2", r.area_cm2, "cm^2", false);
    for (const auto& w : r.warnings) out << "# warning: " << w << '\n';
    return out.str();
}

DerivedRates parse_params_report(const std::string& text) {
    DerivedRates r;
    std::map<std::string, double*> fields = {
        {"n_a_cm3", &r.n_a_cm3},
        {"sigma0_cm2", &r.sigma0_cm2},
        {"sigma_delta_cm2", &r.sigma_delta_cm2},
        {"d0", &r.d0},
        {"d_delta", &r.d_delta},
        {"q", &r.q},
        {"p_a", &r.p_a},
        {"r_se", &r.r_se},
        {"r_pump", &r.r_pump},
        {"r_c", &r.r_c},
        {"gamma_se", &r.gamma_se},
        {"gamma1", &r.gamma1},
        {"gamma", &r.gamma},
        {"s1_in", &r.s1_in},
        {"s_perp_in", &r.s_perp_in},
        {"k_la", &r.k_la},
        {"k_al", &r.k_al},
        {"omega_coupling", &r.omega_coupling},
        {"omega_a", &r.omega_a},
        {"r_sd", &r.r_sd},
        {"delta_over_gamma", &r.delta_over_gamma},
        {"length_cm", &r.length_cm},
        {"area_cm2", &r.area_cm2},
    };
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.rfind("# warning: ", 0) == 0) {
            r.warnings.push_back(line.substr(11));
            continue;
        }
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("params report: expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "species") {
            r.species = species_from_name(val);
        } else {
            auto it = fields.find(key);
            if (it == fields.end())
                throw DataError("params report: unknown key " + key);
            *it->second = parse_number(val, key, line_no);
        }
        seen.insert(key);
    }
    for (const auto& [key, ptr] : fields) {
        (void)ptr;
        if (!seen.count(key)) throw DataError("params report: missing key " + key);
    }
    if (!seen.count("species")) throw DataError("params report: missing key species");
    return r;
}

std::vector<std::pair<double, double>> read_xy_csv(std::istream& in) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            if (first) { first = false; continue; } // tolerate a header
            char msg[96];
            std::snprintf(msg, sizeof msg, "csv: line %d: expected x,y", line_no);
            throw DataError(msg);
        }
        const std::string xs = trim(line.substr(0, comma));
        std::string ys = trim(line.substr(comma + 1));
        const auto extra = ys.find(',');
        if (extra != std::string::npos) ys.erase(extra); // ignore extra columns
        char* endx = nullptr;
        char* endy = nullptr;
        const double x = std::strtod(xs.c_str(), &endx);
        const double y = std::strtod(ys.c_str(), &endy);
        const bool ok = !xs.empty() && endx == xs.c_str() + xs.size() &&
                        !ys.empty() && endy == ys.c_str() + ys.size();
        if (!ok) {
            if (first) { first = false; continue; } // header row
            char msg[96];
            std::snprintf(msg, sizeof msg, "csv: line %d: bad number", line_no);
            throw DataError(msg);
        }
        rows.push_back({x, y});
        first = false;
    }
    return rows;
}

} // namespace cpsr
