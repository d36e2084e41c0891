#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cochlea/lut.hpp"
#include "cochlea/params.hpp"
#include "cochlea/pole_table.hpp"

namespace cochlea {

enum class Mode { v1d, vstar };

// Line calibration constants. These are artifact configuration, tuned so the
// passive peak sits near the characteristic place and the calibrated knees
// produce the documented compressive regimes; they are not measured data.
struct TLConfig {
    double m_s0 = 0.0;            // series mass scale; 0 -> 2*rho*dx/H
    double m_p0 = 0.0;            // shunt mass scale; 0 -> coupling*m_s0*dx
    double coupling = 1300.0;     // dimensionless gamma = m_p0/(m_s0*dx)
    double l_bm = 1.0e-4;         // BM width (m); absorbed into drive_scale

    double xi_start_20k = 0.16;   // double-pole distance at the 20 kHz place, low level
    double xi_sat_ratio = 2.8;    // xi_sat / xi_start
    double xi_curve = 1.0;        // interior-trajectory exponent scale (dB/dB tuning)
    double xi_min = 0.02, xi_max = 0.65;

    double stim_scale = 2e-5;     // stimulus pressure (Pa) per unit amplitude at 0 dB
    double drive_scale = 1.0e7;   // row-0 forcing (q units) per Pa
    double i_knee1_db = 30.0;     // compression onset, stimulus level (dB)
    double v_knee1 = 0.0;         // calibrated knee velocities (m/s); 0 = uncalibrated
    double v_knee2 = 0.0;
    // Knees are calibrated at one place (knee_ref_cf) and rescaled per section
    // by the line's own linear CF-response profile, so the whole peak region
    // enters its compressive regime together.
    bool per_section_knees = true;
    double knee_ref_cf = 20000.0;

    int update_period = 6;        // base steps between filter updates (1|6|12)
    double rk_rtol = 1e-6;
    double rk_atol = 1e-12;

    double gamma(const ModelParams& p) const;  // resolved coupling
};

struct SectionConstants {
    double omega_n = 0.0;     // rad/s
    double omega_bm = 0.0;    // rad/s (affine-mapped)
    double m_s = 0.0, m_p = 0.0;  // tapered masses, (omega_0/omega_n) scaling
    double xi_start = 0.0, xi_sat = 0.0;
    // anchor (tangency) solution at xi_start; eta and psi stay pinned along
    // the level trajectory so zero-crossing times stay put
    double eta = 1.0, psi = 0.0;
    double knee_scale = 1.0;  // per-section knee factor (own-CF response ratio)
    double env_c0 = 0.0, env_c1 = 0.0, env_d1 = 0.0;  // first-order envelope LP
};

// --- small kernels (unit-testable pieces of the update law) ----------------

// g = omega_n^2 y + delta omega_n v - rho omega_n^2 y(t - tau)
double g_kernel(double omega_n, double delta, double rho_fb, double y, double v,
                double y_delayed);

// Uniform Catmull-Rom, interpolates p1 (u=0) -> p2 (u=1).
double catmull_rom(double p0, double p1, double p2, double p3, double u);

// Quadratic Lagrange through samples at lags 0,1,2, evaluated at lag x.
double lagrange3(double h0, double h1, double h2, double x);

// First-order low-pass (unit DC gain) via the bilinear transform.
// Throws ConfigError when fc >= fs/2.
void envelope_coeffs(double fc, double fs, double& c0, double& c1, double& d1);

// Linear interpolation of G between the knees with the -6 dB alignment shift,
// clamped to [G_min, G_max].
double g_strength(double i_db, double v_knee1_db, double v_knee2_db, double G_min,
                  double G_max);

// Pole distance for an instantaneous |v|: xi_start below v_knee1, xi_sat above
// v_knee2, log-log-linear in between (constant-slope compressive growth).
// curve > 1 steepens the interior trajectory without moving the endpoints.
double pole_distance(double v_abs, double v_knee1, double v_knee2, double xi_start,
                     double xi_sat, double curve = 1.0);

// --- tridiagonal pressure solve ---------------------------------------------

class TridiagonalSolver {
  public:
    // Thomas elimination; throws NumericalError on a vanishing pivot.
    void factor(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                const Eigen::VectorXd& super);
    void solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const;
    int size() const { return static_cast<int>(inv_piv_.size()); }

  private:
    Eigen::VectorXd sub_, cp_, inv_piv_;
};

// One-shot A q = rhs convenience used by tests and diagnostics.
Eigen::VectorXd solve_pressure(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                               const Eigen::VectorXd& super, const Eigen::VectorXd& rhs);

// --- simulation --------------------------------------------------------------

struct RunOptions {
    // Linear variants freeze the pole (start/sat/passive) and, in vstar mode,
    // the LUT column at fixed_G; no envelope feedback, no filter updates.
    enum class Pole { nonlinear, start, sat, passive };
    Pole pole = Pole::nonlinear;
    std::optional<double> fixed_G;     // vstar only
    int decim = 1;                     // output decimation (base steps)
    std::vector<int> sections;         // recorded sections; empty = all
    bool record_g = true;
};

struct Traces {
    double fs = 0.0;                   // base rate
    int decim = 1;
    std::vector<int> sections;
    std::vector<double> t;
    std::vector<std::vector<double>> v;  // [section][frame]
    std::vector<std::vector<double>> y;
    std::vector<std::vector<double>> G;
};

struct KneeCalibration {
    double v_knee1 = 0.0, v_knee2 = 0.0;       // linear (m/s)
    double v_knee1_db = 0.0, v_knee2_db = 0.0; // 20 log10(v / 1 m/s)
    double i_knee1_db = 0.0, i_knee2_db = 0.0; // stimulus levels
    double c_start = 0.0, c_sat = 0.0;         // growth-line offsets
};

class Simulator {
  public:
    // lut is required in vstar mode and must match p (N, K, G bounds).
    Simulator(const ModelParams& p, const TLConfig& cfg, Mode mode,
              const FilterLUT* lut = nullptr);

    Traces run(const std::vector<double>& stimulus, const RunOptions& opts = {});

    const std::vector<SectionConstants>& constants() const { return sec_; }
    double gamma() const { return gamma_; }
    const PoleTable& pole_table() const { return table_; }
    int section_of_cf(double cf_hz) const;

  private:
    void update_nonlinearity();
    void update_filters();
    void refactor_pressure();
    void derivative(double theta, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                    double t_base, const std::vector<double>& stim, int step,
                    Eigen::VectorXd& dy, Eigen::VectorXd& dv);
    double stim_at(const std::vector<double>& stim, int step, double theta) const;
    double read_delay(int n, double lag) const;
    void commit_step(const std::vector<double>& stim, int step);

    ModelParams p_;
    TLConfig cfg_;
    Mode mode_;
    const FilterLUT* lut_;
    PoleTable table_;
    std::vector<SectionConstants> sec_;
    double gamma_ = 0.0, dt_ = 0.0;

    // line matrix (diag carries 1 + eps_n)
    Eigen::VectorXd a_sub_, a_diag_base_, a_super_;
    TridiagonalSolver pressure_;

    // state
    Eigen::VectorXd y_, v_;
    Eigen::VectorXd rho_, delta_, tau_steps_;   // active triplet per section
    Eigen::VectorXd g_now_;                     // current G_n
    Eigen::MatrixXd bcoef_;                     // N x K active filter coefficients
    Eigen::VectorXd eps_;
    Eigen::VectorXd env_i_, v_prev_sq_;
    // history of (dv + g) at base steps: N x (K+2) ring
    Eigen::MatrixXd hist_;
    int hist_head_ = 0;
    // delayed displacement ring
    Eigen::MatrixXd ybuf_;
    int ybuf_head_ = 0, ybuf_len_ = 0;
    // per-step alignment sums for the k>=2 history interpolation
    Eigen::VectorXd s_p0_, s_p1_, s_p2_, s_p3_;
    Eigen::VectorXd h0_, h1_, h2_;  // lags 0..2 for the k=1 term
    // scratch
    Eigen::VectorXd scratch_rhs_, scratch_q_, scratch_g_, scratch_Q_;
    RunOptions opts_;
};

// Runs the two linear variants and intersects their growth lines.
// In vstar mode the starting pole uses G_max, the saturating one G_min.
KneeCalibration calibrate_knees(const ModelParams& p, const TLConfig& cfg, Mode mode,
                                const FilterLUT* lut = nullptr, double cf_hz = 20000.0);

// Full run: stimulus sampled at p.fs; lut required for vstar.
Traces simulate(const std::vector<double>& stimulus, const ModelParams& p,
                const TLConfig& cfg, Mode mode, const FilterLUT* lut = nullptr,
                const RunOptions& opts = {});

}  // namespace cochlea
