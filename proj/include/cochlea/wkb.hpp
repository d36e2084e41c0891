#pragma once

#include <complex>
#include <string>

#include "cochlea/params.hpp"
#include "cochlea/spectrum.hpp"

namespace cochlea {

using cplx = std::complex<double>;

// Pressure focusing factor kh/tanh(kh), with series / asymptotic guards so it
// stays finite for |kh| -> 0 and Re(kh) large.
cplx pressure_focusing(cplx kh);

// BM admittance of the duct model with viscous stress:
//   Y = -j w / sigma_bm * [ -w^2 + j w (Gamma + 4 alpha b mu/(sigma_bm H)) + w_bm^2 ]^-1
// with Gamma = (1 - G) * w_bm. Throws NumericalError when the denominator
// magnitude falls below the machine-epsilon guard.
cplx ybm_s2d(double omega, double omega_bm, double G, cplx alpha, const ModelParams& p);

struct DispersionSolution {
    cplx kappa;      // wavenumber (1/m), Re > 0 branch
    cplx alpha;      // pressure_focusing(kappa*H)
    int iterations;
    double residual; // |k tanh(kH) - 2 j rho w Y(alpha(k))| / |rhs|
};

// Solves k*tanh(kH) = 2 j rho w Y(alpha(k)) for the forward-wave root.
// Damped Newton with an omega continuation from the long-wave root; optional
// warm start (pass a previous kappa in *warm). Throws NonConvergenceError.
DispersionSolution solve_dispersion(double omega, double omega_bm, double G,
                                    const ModelParams& p, double tol = 1e-8,
                                    int max_iter = 200, const cplx* warm = nullptr);

// beta(w) = alpha(w; G) / alpha(w; G_ref) on the canonical regression grid.
ComplexSpectrum beta_target(double omega_bm, double G, const ModelParams& p);

// CSV dump (f_hz, beta_re, beta_im) for plotting.
void write_beta_csv(const ComplexSpectrum& beta, const std::string& path);

}  // namespace cochlea
