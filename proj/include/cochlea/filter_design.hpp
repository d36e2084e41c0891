#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cochlea/params.hpp"
#include "cochlea/spectrum.hpp"

namespace cochlea {

// All-pole correction filter: beta_hat(z) = (1+eps) / (1 - sum_k b_k z^-k).
struct PoleFilter {
    Eigen::VectorXd b;   // K real coefficients
    double eps = 0.0;    // DC-gain regressor; after enforcement eps == -sum(b)
    double omega_bm = 0.0;
    double G = 0.0;
};

struct RegressionProblem {
    Eigen::MatrixXd Xl_re, Xl_im;  // m1 x K
    Eigen::MatrixXd Xr_re, Xr_im;  // (m2-m1) x K
    Eigen::VectorXd Yl_re, Yl_im;  // m1
    int m1 = 0;
    double lambda1 = 1.0, lambda2 = 0.3;
    bool denominator_guard_hit = false;  // set when the hinge-term guard fired
};

struct FitDiagnostics {
    double cost = 0.0;
    double max_mag_err = 0.0;      // max |(|bhat|-|beta|)/|beta|| over the left block
    double max_pole_radius = 0.0;
    int iterations = 0;
    bool lambda1_doubled = false;  // unstable first fit, retried with 2*lambda1
};

// Feature matrices and targets; left block covers grid frequencies below
// omega_cut = 1.3 * omega_bm. Throws ConfigError on an empty left block.
RegressionProblem build_problem(const ComplexSpectrum& beta, double omega_bm,
                                const ModelParams& p);

// Gain-extended penalized cost (the form actually minimized).
double lse_cost(const Eigen::VectorXd& b, double eps, const RegressionProblem& prob);

// Plain cost without the gain regressor, kept for tests.
double lse_cost_plain(const Eigen::VectorXd& b, const RegressionProblem& prob);

// Gradient of the plain cost wrt b (zero subgradient on inactive hinge rows).
Eigen::VectorXd lse_cost_plain_grad(const Eigen::VectorXd& b,
                                    const RegressionProblem& prob,
                                    double* cost = nullptr);

// Levenberg-Marquardt fit from (b, eps) = 0 followed by DC enforcement
// eps <- -sum(b). Retries once with doubled lambda1 if the result is
// unstable; throws FitError if it still is (or the cost is non-finite).
PoleFilter fit_filter(const ComplexSpectrum& beta, double omega_bm, double G,
                      const ModelParams& p, FitDiagnostics* diag = nullptr);

// Plain fit without the gain regressor (eps pinned to 0, no DC enforcement).
// The gain-extended problem is degenerate for weak ridge; this form keeps
// synthetic-target recovery well posed and is used by tests and diagnostics.
PoleFilter fit_filter_plain(const ComplexSpectrum& beta, double omega_bm, double G,
                            const ModelParams& p, FitDiagnostics* diag = nullptr);

// Frequency response (1+eps)/(1 - sum b_k e^{-j k w dt}), dt = 1/fs.
std::complex<double> beta_hat(const PoleFilter& f, double omega, double fs);

// Roots of z^K - sum_k b_k z^{K-k} via the companion matrix.
std::vector<std::complex<double>> filter_poles(const PoleFilter& f);

double max_pole_radius(const PoleFilter& f);
bool is_stable(const PoleFilter& f, double radius_limit = 1.0);

}  // namespace cochlea
