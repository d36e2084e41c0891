#pragma once

#include <string>
#include <vector>

namespace cochlea {

// Gerbil model constants shared by every module. Field names double as the
// keys of the text parameter file.
struct ModelParams {
    // Frequency-domain duct model
    double H = 320e-6;        // scala height (m)
    double sigma_bm = 0.06;   // BM areal mass density (kg/m^2)
    double rho = 1.0e3;       // fluid density (kg/m^3)
    double mu = 7.0e-3;       // dynamic viscosity (Pa*s)
    double b_visc = 2.5;      // empirical viscous factor
    double G_min = 0.0;       // active-process strength bounds
    double G_max = 1.3;
    double G_ref = 0.7;

    // Time-domain line
    double fs = 200e3;        // sampling frequency (Hz)
    int N = 1000;             // section count
    double L = 12.1e-3;       // cochlear length (m)
    double A1 = 50216.0;      // place-frequency map (Hz)
    double A2 = 181.034;      // (1/m)
    double B = 140.0;         // (Hz)
    double qerb_base = 1.45;  // Q_ERB at 1 kHz
    double qerb_exp = 0.58;
    double a = 0.45;          // compression slope (dB/dB)

    // Regression
    double lambda1 = 1.0;
    double lambda2 = 0.3;
    int K = 32;               // filter order
    int m2 = 512;             // frequency-grid half-size

    void validate() const;    // throws ConfigError on violated invariants
};

struct SectionMap {
    std::vector<double> x;    // distance from base (m), uniform, x[N-1] == L
    std::vector<double> cf;   // characteristic frequency (Hz), strictly decreasing
};

// f(x) = A1*10^(-A2*x) - B. Throws std::domain_error outside [0, L].
double greenwood_cf(double x, const ModelParams& p);

SectionMap section_positions(const ModelParams& p);

// Q = qerb_base*(f/1kHz)^qerb_exp. Throws std::domain_error for f <= 0.
double qerb(double f_hz, const ModelParams& p);

// Characteristic pulsation of the duct model for a section with pulsation
// omega_n: 1.2*omega_n + 2*pi*1500.
double omega_bm_of(double omega_n);

// Text parameter file, one "key = value" per line, '#' comments.
// Unknown keys are rejected.
ModelParams load_params(const std::string& path);
void save_params(const ModelParams& p, const std::string& path);

}  // namespace cochlea
