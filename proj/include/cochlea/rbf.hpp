#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "cochlea/params.hpp"
#include "cochlea/spectrum.hpp"

namespace cochlea {

// Radial-basis-function regressor (omega_bm, G) -> K filter coefficients.
// Gaussian kernels on the normalized unit square, each multiplied by a
// per-center affine term in the first (omega_bm) dimension.
struct RbfNet {
    int n_omega = 18;          // centers along normalized omega_bm
    int n_g = 20;              // centers along normalized G
    double sigma = 0.04;
    int K = 32;
    Eigen::MatrixXd centers;   // C x 2 rows (u1, u2)
    Eigen::MatrixXd weights;   // C x K
    Eigen::VectorXd slope;     // per-center affine s_c
    Eigen::VectorXd intercept; // per-center affine t_c
    double omega_bm_min = 0.0, omega_bm_max = 1.0;  // rad/s bounds
    double g_min = 0.0, g_max = 1.0;

    int n_centers() const { return static_cast<int>(centers.rows()); }
};

// Fresh net: centers on a uniform n_omega x n_g grid over the unit square,
// zero weights, affine terms (s, t) = (0, 1), bounds from the section map.
RbfNet make_rbf_net(const ModelParams& p);

// b_hat_k = sum_c w_ck * (s_c u1 + t_c) * exp(-|u - c|^2 / (2 sigma^2)),
// inputs clamped to the normalization bounds.
Eigen::VectorXd rbf_forward(const RbfNet& net, double omega_bm, double G);

struct TrainOptions {
    std::uint64_t seed = 1;
    int stage1_steps = 1000;  // match LM-fitted coefficients
    double lr1 = 0.1, momentum1 = 0.8;
    int stage2_steps = 1000;  // minimize the LSE cost directly
    double lr2 = 1e-3, momentum2 = 0.9;
};

struct TrainReport {
    double stage1_first_mean = 0.0, stage1_last_mean = 0.0;
    double stage2_first_mean = 0.0, stage2_last_mean = 0.0;
};

using BetaFn = std::function<ComplexSpectrum(double omega_bm, double G)>;

// Two-stage stochastic gradient training on uniformly sampled (omega_bm, G).
// Throws TrainingError (with seed and step) on divergence.
RbfNet train_rbf(const ModelParams& p, const TrainOptions& opts,
                 TrainReport* report = nullptr);

// Same, with an injectable beta source (tests use synthetic targets).
RbfNet train_rbf_with(const ModelParams& p, const TrainOptions& opts,
                      const BetaFn& beta_fn, TrainReport* report = nullptr);

void save_rbf(const RbfNet& net, const std::string& path);
RbfNet load_rbf(const std::string& path);

}  // namespace cochlea
