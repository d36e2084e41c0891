#include "cochlea/params.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cochlea/errors.hpp"

namespace cochlea {

void ModelParams::validate() const {
    auto req = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid parameters: ") + what);
    };
    req(H > 0, "H must be > 0");
    req(sigma_bm > 0, "sigma_bm must be > 0");
    req(rho > 0, "rho must be > 0");
    req(mu > 0, "mu must be > 0");
    req(fs > 0, "fs must be > 0");
    req(N >= 2, "N must be >= 2");
    req(L > 0, "L must be > 0");
    req(G_min <= G_ref && G_ref <= G_max, "require G_min <= G_ref <= G_max");
    req(K >= 1, "K must be >= 1");
    req(m2 >= 2, "m2 must be >= 2");
    req(A1 > B, "A1 must exceed B");
}

double greenwood_cf(double x, const ModelParams& p) {
    if (x < 0.0 || x > p.L) throw std::domain_error("greenwood_cf: x outside [0, L]");
    return p.A1 * std::pow(10.0, -p.A2 * x) - p.B;
}

SectionMap section_positions(const ModelParams& p) {
    SectionMap m;
    m.x.resize(p.N);
    m.cf.resize(p.N);
    const double dx = p.L / (p.N - 1);
    for (int n = 0; n < p.N; ++n) {
        m.x[n] = (n == p.N - 1) ? p.L : n * dx;
        m.cf[n] = greenwood_cf(m.x[n], p);
    }
    return m;
}

double qerb(double f_hz, const ModelParams& p) {
    if (f_hz <= 0.0) throw std::domain_error("qerb: f must be > 0");
    return p.qerb_base * std::pow(f_hz / 1000.0, p.qerb_exp);
}

double omega_bm_of(double omega_n) {
    return 1.2 * omega_n + 2.0 * M_PI * 1500.0;
}

namespace {

using FieldMap = std::map<std::string, std::function<void(ModelParams&, double)>>;

const FieldMap& field_setters() {
    static const FieldMap m = {
        {"H", [](ModelParams& p, double v) { p.H = v; }},
        {"sigma_bm", [](ModelParams& p, double v) { p.sigma_bm = v; }},
        {"rho", [](ModelParams& p, double v) { p.rho = v; }},
        {"mu", [](ModelParams& p, double v) { p.mu = v; }},
        {"b_visc", [](ModelParams& p, double v) { p.b_visc = v; }},
        {"G_min", [](ModelParams& p, double v) { p.G_min = v; }},
        {"G_max", [](ModelParams& p, double v) { p.G_max = v; }},
        {"G_ref", [](ModelParams& p, double v) { p.G_ref = v; }},
        {"fs", [](ModelParams& p, double v) { p.fs = v; }},
        {"N", [](ModelParams& p, double v) { p.N = static_cast<int>(v); }},
        {"L", [](ModelParams& p, double v) { p.L = v; }},
        {"A1", [](ModelParams& p, double v) { p.A1 = v; }},
        {"A2", [](ModelParams& p, double v) { p.A2 = v; }},
        {"B", [](ModelParams& p, double v) { p.B = v; }},
        {"qerb_base", [](ModelParams& p, double v) { p.qerb_base = v; }},
        {"qerb_exp", [](ModelParams& p, double v) { p.qerb_exp = v; }},
        {"a", [](ModelParams& p, double v) { p.a = v; }},
        {"lambda1", [](ModelParams& p, double v) { p.lambda1 = v; }},
        {"lambda2", [](ModelParams& p, double v) { p.lambda2 = v; }},
        {"K", [](ModelParams& p, double v) { p.K = static_cast<int>(v); }},
        {"m2", [](ModelParams& p, double v) { p.m2 = static_cast<int>(v); }},
    };
    return m;
}

}  // namespace

ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file: " + path);
    ModelParams p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key;
        std::istringstream ss(line);
        if (!(ss >> key)) continue;  // blank
        std::string eq;
        double value;
        if (!(ss >> eq >> value) || eq != "=") {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const auto& setters = field_setters();
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": unknown parameter '" + key + "'");
        }
        it->second(p, value);
    }
    p.validate();
    return p;
}

void save_params(const ModelParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write parameter file: " + path);
    out.precision(17);
    out << "H = " << p.H << "\n"
        << "sigma_bm = " << p.sigma_bm << "\n"
        << "rho = " << p.rho << "\n"
        << "mu = " << p.mu << "\n"
        << "b_visc = " << p.b_visc << "\n"
        << "G_min = " << p.G_min << "\n"
        << "G_max = " << p.G_max << "\n"
        << "G_ref = " << p.G_ref << "\n"
        << "fs = " << p.fs << "\n"
        << "N = " << p.N << "\n"
        << "L = " << p.L << "\n"
        << "A1 = " << p.A1 << "\n"
        << "A2 = " << p.A2 << "\n"
        << "B = " << p.B << "\n"
        << "qerb_base = " << p.qerb_base << "\n"
        << "qerb_exp = " << p.qerb_exp << "\n"
        << "a = " << p.a << "\n"
        << "lambda1 = " << p.lambda1 << "\n"
        << "lambda2 = " << p.lambda2 << "\n"
        << "K = " << p.K << "\n"
        << "m2 = " << p.m2 << "\n";
}

}  // namespace cochlea
