#include "cochlea/tl_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cochlea/errors.hpp"
#include "cochlea/stimulus.hpp"

namespace cochlea {

double TLConfig::gamma(const ModelParams& p) const {
    const double dx = p.L / (p.N - 1);
    const double ms = (m_s0 > 0.0) ? m_s0 : 2.0 * p.rho * dx / p.H;
    const double mp = (m_p0 > 0.0) ? m_p0 : coupling * ms * dx;
    return mp / (ms * dx);
}

double g_kernel(double omega_n, double delta, double rho_fb, double y, double v,
                double y_delayed) {
    return omega_n * omega_n * y + delta * omega_n * v -
           rho_fb * omega_n * omega_n * y_delayed;
}

double catmull_rom(double p0, double p1, double p2, double p3, double u) {
    const double a0 = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    const double a1 = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const double a2 = -p0 + p2;
    return 0.5 * (((a0 * u + a1) * u + a2) * u) + p1;
}

double lagrange3(double h0, double h1, double h2, double x) {
    return 0.5 * (x - 1.0) * (x - 2.0) * h0 - x * (x - 2.0) * h1 +
           0.5 * x * (x - 1.0) * h2;
}

void envelope_coeffs(double fc, double fs, double& c0, double& c1, double& d1) {
    if (fc <= 0.0 || fc >= fs / 2.0)
        throw ConfigError("envelope_coeffs: cutoff must lie in (0, fs/2)");
    const double kt = std::tan(M_PI * fc / fs);
    c0 = kt / (kt + 1.0);
    c1 = c0;
    d1 = (kt - 1.0) / (kt + 1.0);
}

double g_strength(double i_db, double v_knee1_db, double v_knee2_db, double G_min,
                  double G_max) {
    const double t = (i_db - 6.0 - v_knee1_db) / (v_knee2_db - v_knee1_db);
    const double g = G_max + t * (G_min - G_max);
    return std::clamp(g, G_min, G_max);
}

double pole_distance(double v_abs, double v_knee1, double v_knee2, double xi_start,
                     double xi_sat, double curve) {
    if (v_abs <= v_knee1) return xi_start;
    if (v_abs >= v_knee2) return xi_sat;
    // log-log position between the knees, optionally warped toward the
    // saturating end; endpoints are invariant under the warp
    const double u = std::log(v_abs / v_knee1) / std::log(v_knee2 / v_knee1);
    const double w = 1.0 - std::pow(1.0 - u, curve);
    return xi_start * std::pow(xi_sat / xi_start, w);
}

void TridiagonalSolver::factor(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                               const Eigen::VectorXd& super) {
    const int n = static_cast<int>(diag.size());
    sub_ = sub;
    cp_.resize(n - 1);
    inv_piv_.resize(n);
    double piv = diag(0);
    if (piv == 0.0) throw NumericalError("tridiagonal: zero pivot at row 0");
    inv_piv_(0) = 1.0 / piv;
    cp_(0) = super(0) * inv_piv_(0);
    for (int i = 1; i < n; ++i) {
        piv = diag(i) - sub(i - 1) * cp_(i - 1);
        if (piv == 0.0)
            throw NumericalError("tridiagonal: zero pivot at row " + std::to_string(i));
        inv_piv_(i) = 1.0 / piv;
        if (i < n - 1) cp_(i) = super(i) * inv_piv_(i);
    }
}

void TridiagonalSolver::solve(const Eigen::VectorXd& rhs, Eigen::VectorXd& x) const {
    const int n = size();
    x.resize(n);
    x(0) = rhs(0) * inv_piv_(0);
    for (int i = 1; i < n; ++i)
        x(i) = (rhs(i) - sub_(i - 1) * x(i - 1)) * inv_piv_(i);
    for (int i = n - 2; i >= 0; --i) x(i) -= cp_(i) * x(i + 1);
}

Eigen::VectorXd solve_pressure(const Eigen::VectorXd& sub, const Eigen::VectorXd& diag,
                               const Eigen::VectorXd& super, const Eigen::VectorXd& rhs) {
    TridiagonalSolver s;
    s.factor(sub, diag, super);
    Eigen::VectorXd q;
    s.solve(rhs, q);
    return q;
}

// ---------------------------------------------------------------------------

Simulator::Simulator(const ModelParams& p, const TLConfig& cfg, Mode mode,
                     const FilterLUT* lut)
    : p_(p), cfg_(cfg), mode_(mode), lut_(lut), table_(cfg.xi_min * 0.5, cfg.xi_max, 280) {
    p_.validate();
    if (mode_ == Mode::vstar) {
        if (!lut_) throw ConfigError("vstar mode requires a filter LUT");
        if (lut_->n_sections != static_cast<std::uint32_t>(p_.N) ||
            lut_->K != static_cast<std::uint32_t>(p_.K))
            throw ConfigError("LUT dimensions do not match the model parameters");
    }
    dt_ = 1.0 / p_.fs;
    gamma_ = cfg_.gamma(p_);

    const SectionMap map = section_positions(p_);
    const double dx = p_.L / (p_.N - 1);
    const double ms0 = (cfg_.m_s0 > 0.0) ? cfg_.m_s0 : 2.0 * p_.rho * dx / p_.H;
    const double mp0 = (cfg_.m_p0 > 0.0) ? cfg_.m_p0 : cfg_.coupling * ms0 * dx;
    const double omega0 = 2.0 * M_PI * map.cf[0];
    const double xi_start_cap = cfg_.xi_max / cfg_.xi_sat_ratio;

    sec_.resize(p_.N);
    for (int n = 0; n < p_.N; ++n) {
        SectionConstants& s = sec_[n];
        s.omega_n = 2.0 * M_PI * map.cf[n];
        s.omega_bm = omega_bm_of(s.omega_n);
        s.m_s = ms0 * omega0 / s.omega_n;
        s.m_p = mp0 * omega0 / s.omega_n;
        const double q_ratio = std::pow(20000.0 / map.cf[n], p_.qerb_exp);
        s.xi_start = std::clamp(cfg_.xi_start_20k * q_ratio, cfg_.xi_min, xi_start_cap);
        s.xi_sat = s.xi_start * cfg_.xi_sat_ratio;
        const PoleTriplet anchor = table_.at(s.xi_start);
        s.eta = anchor.eta;
        s.psi = anchor.psi;
        envelope_coeffs(map.cf[n] / 2.0, p_.fs, s.env_c0, s.env_c1, s.env_d1);
    }

    // Fluid rows: -gamma q_{n-1} + [1+eps_n + gamma(1 + w_{n-1}/w_n)] q_n
    //             - gamma (w_n/w_{n+1}) q_{n+1} = g_n - Q_n (+ drive at n=0).
    // Row 0 is the middle-ear piston, row N-1 the pressure-release end.
    a_sub_.setConstant(p_.N - 1, -gamma_);
    a_super_.resize(p_.N - 1);
    a_diag_base_.resize(p_.N);
    a_diag_base_(0) = 1.0 + gamma_;
    for (int n = 1; n < p_.N; ++n)
        a_diag_base_(n) = 1.0 + gamma_ * (1.0 + sec_[n - 1].omega_n / sec_[n].omega_n);
    for (int n = 0; n + 1 < p_.N; ++n)
        a_super_(n) = -gamma_ * sec_[n].omega_n / sec_[n + 1].omega_n;

    // per-section knee scaling: each section's steady response magnitude at
    // its own CF in the frozen low-level state, from the frequency-domain
    // elimination of the same line equations
    if (cfg_.per_section_knees) {
        const int N = p_.N;
        std::vector<std::complex<double>> sub(N - 1), diag(N), super(N - 1), cp(N - 1),
            d(N), q(N);
        auto own_cf_mag = [&](int probe) {
            const double w = sec_[probe].omega_n;
            const std::complex<double> s(0.0, w);
            for (int n = 0; n < N; ++n) {
                const double wn = sec_[n].omega_n;
                const PoleTriplet t = pinned_triplet(sec_[n].xi_start, sec_[n].eta,
                                                     sec_[n].psi);
                const std::complex<double> Dt =
                    s * s + t.delta * wn * s +
                    wn * wn * (1.0 - t.rho * std::exp(-t.psi * s / wn));
                diag[n] = ((n == 0) ? 1.0 + gamma_
                                    : 1.0 + gamma_ * (1.0 + sec_[n - 1].omega_n / wn)) -
                          (1.0 + w * w / Dt);
                if (n < N - 1) super[n] = -gamma_ * wn / sec_[n + 1].omega_n;
                if (n > 0) sub[n - 1] = -gamma_;
            }
            cp[0] = super[0] / diag[0];
            d[0] = 1.0 / diag[0];  // unit drive on row 0
            for (int i = 1; i < N; ++i) {
                const std::complex<double> m = diag[i] - sub[i - 1] * cp[i - 1];
                if (i < N - 1) cp[i] = super[i] / m;
                d[i] = (((i == 0) ? 1.0 : 0.0) - sub[i - 1] * d[i - 1]) / m;
            }
            q[N - 1] = d[N - 1];
            for (int i = N - 2; i >= 0; --i) q[i] = d[i] - cp[i] * q[i + 1];
            const double wp = sec_[probe].omega_n;
            const PoleTriplet tp = pinned_triplet(sec_[probe].xi_start, sec_[probe].eta,
                                                  sec_[probe].psi);
            const std::complex<double> Dt =
                s * s + tp.delta * wp * s +
                wp * wp * (1.0 - tp.rho * std::exp(-tp.psi * s / wp));
            return std::abs(s * q[probe] / Dt);
        };
        const int ref = section_of_cf(cfg_.knee_ref_cf);
        const double w_ref = own_cf_mag(ref);
        for (int n = 0; n < N; ++n)
            sec_[n].knee_scale =
                std::clamp(own_cf_mag(n) / w_ref, 1e-3, 1e3);
    }

    const double psi_cap = table_.at(table_.xi_max()).psi * 1.05;
    double max_steps = 0.0;
    for (const auto& s : sec_)
        max_steps = std::max(max_steps, psi_cap / s.omega_n * p_.fs);
    ybuf_len_ = static_cast<int>(std::ceil(max_steps)) + 5;

    const int W = p_.K + 2;
    y_.setZero(p_.N);
    v_.setZero(p_.N);
    rho_.setZero(p_.N);
    delta_.setZero(p_.N);
    tau_steps_.setZero(p_.N);
    g_now_.setZero(p_.N);
    bcoef_.setZero(p_.N, p_.K);
    eps_.setZero(p_.N);
    env_i_.setZero(p_.N);
    v_prev_sq_.setZero(p_.N);
    hist_.setZero(p_.N, W);
    ybuf_.setZero(p_.N, ybuf_len_);
    s_p0_.setZero(p_.N);
    s_p1_.setZero(p_.N);
    s_p2_.setZero(p_.N);
    s_p3_.setZero(p_.N);
    h0_.setZero(p_.N);
    h1_.setZero(p_.N);
    h2_.setZero(p_.N);
}

int Simulator::section_of_cf(double cf_hz) const {
    int best = 0;
    double err = std::abs(sec_[0].omega_n - 2.0 * M_PI * cf_hz);
    for (int n = 1; n < p_.N; ++n) {
        const double e = std::abs(sec_[n].omega_n - 2.0 * M_PI * cf_hz);
        if (e < err) {
            err = e;
            best = n;
        }
    }
    return best;
}

void Simulator::update_nonlinearity() {
    for (int n = 0; n < p_.N; ++n) {
        double xi;
        switch (opts_.pole) {
            case RunOptions::Pole::start: xi = sec_[n].xi_start; break;
            case RunOptions::Pole::sat: xi = sec_[n].xi_sat; break;
            case RunOptions::Pole::passive:
                rho_(n) = 0.0;
                delta_(n) = 1.0;
                tau_steps_(n) = 3.0;
                continue;
            default:
                xi = pole_distance(std::abs(v_(n)), cfg_.v_knee1 * sec_[n].knee_scale,
                                   cfg_.v_knee2 * sec_[n].knee_scale, sec_[n].xi_start,
                                   sec_[n].xi_sat, cfg_.xi_curve);
        }
        // ring frequency and feedback delay stay pinned at the anchor values;
        // only the pole distance (damping) follows the level
        const PoleTriplet t = pinned_triplet(xi, sec_[n].eta, sec_[n].psi);
        rho_(n) = t.rho;
        delta_(n) = t.delta;
        tau_steps_(n) = t.psi / sec_[n].omega_n * p_.fs;
    }
}

void Simulator::update_filters() {
    for (int n = 0; n < p_.N; ++n) {
        double G;
        if (opts_.fixed_G) {
            G = *opts_.fixed_G;
        } else {
            const double i_db =
                10.0 * std::log10(std::max(env_i_(n), 1e-300));
            const double k_db = 20.0 * std::log10(sec_[n].knee_scale);
            G = g_strength(i_db, 20.0 * std::log10(cfg_.v_knee1) + k_db,
                           20.0 * std::log10(cfg_.v_knee2) + k_db, p_.G_min, p_.G_max);
        }
        g_now_(n) = G;
        const int g = lut_g_index(*lut_, G);
        bcoef_.row(n) =
            Eigen::Map<const Eigen::VectorXd>(lut_->entry_b(n, g), p_.K).transpose();
        eps_(n) = lut_->entry_eps(n, g);
    }
    refactor_pressure();
}

void Simulator::refactor_pressure() {
    Eigen::VectorXd diag = a_diag_base_ + eps_;
    pressure_.factor(a_sub_, diag, a_super_);
}

double Simulator::stim_at(const std::vector<double>& stim, int step, double theta) const {
    const int n = static_cast<int>(stim.size());
    auto at = [&](int i) { return stim[std::clamp(i, 0, n - 1)]; };
    return cfg_.drive_scale * cfg_.stim_scale *
           catmull_rom(at(step - 1), at(step), at(step + 1), at(step + 2), theta);
}

double Simulator::read_delay(int n, double lag) const {
    const int j0 = static_cast<int>(lag);
    const double u = lag - j0;
    auto at = [&](int j) {
        return ybuf_(n, (ybuf_head_ - j % ybuf_len_ + ybuf_len_) % ybuf_len_);
    };
    return catmull_rom(at(j0 - 1), at(j0), at(j0 + 1), at(j0 + 2), u);
}

void Simulator::derivative(double theta, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& v, double /*t_base*/,
                           const std::vector<double>& stim, int step,
                           Eigen::VectorXd& dy, Eigen::VectorXd& dv) {
    const bool filt = (mode_ == Mode::vstar);
    const double u = 1.0 - theta;  // Catmull-Rom position for the k>=2 lags
    for (int n = 0; n < p_.N; ++n) {
        const double ydel =
            (rho_(n) != 0.0) ? read_delay(n, tau_steps_(n) - theta) : 0.0;
        const double g =
            g_kernel(sec_[n].omega_n, delta_(n), rho_(n), y(n), v(n), ydel);
        scratch_g_(n) = g;
        double Q = 0.0;
        if (filt) {
            Q = bcoef_(n, 0) * lagrange3(h0_(n), h1_(n), h2_(n), 1.0 - theta) +
                catmull_rom(s_p0_(n), s_p1_(n), s_p2_(n), s_p3_(n), u);
        }
        scratch_Q_(n) = Q;
        scratch_rhs_(n) = g - Q;
    }
    scratch_rhs_(0) += stim_at(stim, step, theta);
    pressure_.solve(scratch_rhs_, scratch_q_);
    dy = v;
    dv = (Eigen::VectorXd::Ones(p_.N) + eps_).cwiseProduct(scratch_q_) - scratch_g_ +
         scratch_Q_;
}

namespace {
// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
}  // namespace

void Simulator::commit_step(const std::vector<double>& stim, int step) {
    // theta = 1 evaluation of (dv + g) with the committed state, before the
    // buffers advance; the k-sum collapses onto the stored alignment sums.
    for (int n = 0; n < p_.N; ++n) {
        const double ydel =
            (rho_(n) != 0.0) ? read_delay(n, tau_steps_(n) - 1.0) : 0.0;
        scratch_g_(n) =
            g_kernel(sec_[n].omega_n, delta_(n), rho_(n), y_(n), v_(n), ydel);
        scratch_Q_(n) =
            (mode_ == Mode::vstar) ? bcoef_(n, 0) * h0_(n) + s_p1_(n) : 0.0;
        scratch_rhs_(n) = scratch_g_(n) - scratch_Q_(n);
    }
    scratch_rhs_(0) += stim_at(stim, step, 1.0);
    pressure_.solve(scratch_rhs_, scratch_q_);

    const int W = p_.K + 2;
    hist_head_ = (hist_head_ - 1 + W) % W;
    ybuf_head_ = (ybuf_head_ + 1) % ybuf_len_;
    for (int n = 0; n < p_.N; ++n) {
        const double dv_n =
            (1.0 + eps_(n)) * scratch_q_(n) - scratch_g_(n) + scratch_Q_(n);
        hist_(n, hist_head_) = dv_n + scratch_g_(n);
        ybuf_(n, ybuf_head_) = y_(n);
        const double vsq = v_(n) * v_(n);
        env_i_(n) = sec_[n].env_c0 * vsq + sec_[n].env_c1 * v_prev_sq_(n) -
                    sec_[n].env_d1 * env_i_(n);
        v_prev_sq_(n) = vsq;
    }
    if (!v_.allFinite())
        throw NumericalError("simulation diverged at step " + std::to_string(step));
}

Traces Simulator::run(const std::vector<double>& stimulus, const RunOptions& opts) {
    opts_ = opts;
    const bool nonlinear = (opts.pole == RunOptions::Pole::nonlinear);
    if (nonlinear && (cfg_.v_knee1 <= 0.0 || cfg_.v_knee2 <= cfg_.v_knee1))
        throw ConfigError("nonlinear run requires calibrated knee velocities");
    if (mode_ == Mode::vstar && !lut_) throw ConfigError("vstar requires a LUT");
    if (cfg_.update_period < 1) throw ConfigError("update_period must be >= 1");

    // reset state
    y_.setZero();
    v_.setZero();
    env_i_.setZero();
    v_prev_sq_.setZero();
    hist_.setZero();
    ybuf_.setZero();
    hist_head_ = 0;
    ybuf_head_ = 0;
    scratch_rhs_.resize(p_.N);
    scratch_q_.resize(p_.N);
    scratch_g_.resize(p_.N);
    scratch_Q_.resize(p_.N);
    update_nonlinearity();
    if (mode_ == Mode::vstar)
        update_filters();
    else
        refactor_pressure();

    Traces tr;
    tr.fs = p_.fs;
    tr.decim = opts.decim;
    tr.sections = opts.sections;
    if (tr.sections.empty()) {
        tr.sections.resize(p_.N);
        for (int n = 0; n < p_.N; ++n) tr.sections[n] = n;
    }
    const int n_steps = static_cast<int>(stimulus.size());
    const int n_rec = static_cast<int>(tr.sections.size());
    tr.v.assign(n_rec, {});
    tr.y.assign(n_rec, {});
    if (opts.record_g) tr.G.assign(n_rec, {});

    Eigen::VectorXd k1y, k1v, k2y, k2v, k3y, k3v, k4y, k4v, k5y, k5v, k6y, k6v, k7y, k7v;
    Eigen::VectorXd yt, vt, y5, v5;
    double dt_try = dt_;

    for (int step = 0; step < n_steps; ++step) {
        if (nonlinear) update_nonlinearity();
        if (mode_ == Mode::vstar && nonlinear && step % cfg_.update_period == 0)
            update_filters();

        // alignment sums for the history interpolation, fixed over this step
        if (mode_ == Mode::vstar) {
            const int W = p_.K + 2;
            auto H = [&](int n, int k) { return hist_(n, (hist_head_ + k) % W); };
            for (int n = 0; n < p_.N; ++n) {
                h0_(n) = H(n, 0);
                h1_(n) = H(n, 1);
                h2_(n) = H(n, 2);
                double sp0 = 0, sp1 = 0, sp2 = 0, sp3 = 0;
                for (int k = 2; k <= p_.K; ++k) {
                    const double bk = bcoef_(n, k - 1);
                    sp0 += bk * H(n, k - 2);
                    sp1 += bk * H(n, k - 1);
                    sp2 += bk * H(n, k);
                    sp3 += bk * H(n, k + 1);
                }
                s_p0_(n) = sp0;
                s_p1_(n) = sp1;
                s_p2_(n) = sp2;
                s_p3_(n) = sp3;
            }
        }

        if (step % opts.decim == 0) {
            tr.t.push_back(step * dt_);
            for (int i = 0; i < n_rec; ++i) {
                tr.v[i].push_back(v_(tr.sections[i]));
                tr.y[i].push_back(y_(tr.sections[i]));
                if (opts.record_g) tr.G[i].push_back(g_now_(tr.sections[i]));
            }
        }

        // adaptive embedded pair across [step, step+1] * dt
        double t_loc = 0.0;
        double dt = std::min(dt_try, dt_);
        while (t_loc < dt_ - 1e-15 * dt_) {
            dt = std::min(dt, dt_ - t_loc);
            const double th0 = t_loc / dt_;
            const double hdt = dt / dt_;  // step size in theta units

            derivative(th0, y_, v_, 0, stimulus, step, k1y, k1v);
            yt = y_ + dt * a21 * k1y;
            vt = v_ + dt * a21 * k1v;
            derivative(th0 + c2 * hdt, yt, vt, 0, stimulus, step, k2y, k2v);
            yt = y_ + dt * (a31 * k1y + a32 * k2y);
            vt = v_ + dt * (a31 * k1v + a32 * k2v);
            derivative(th0 + c3 * hdt, yt, vt, 0, stimulus, step, k3y, k3v);
            yt = y_ + dt * (a41 * k1y + a42 * k2y + a43 * k3y);
            vt = v_ + dt * (a41 * k1v + a42 * k2v + a43 * k3v);
            derivative(th0 + c4 * hdt, yt, vt, 0, stimulus, step, k4y, k4v);
            yt = y_ + dt * (a51 * k1y + a52 * k2y + a53 * k3y + a54 * k4y);
            vt = v_ + dt * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v);
            derivative(th0 + c5 * hdt, yt, vt, 0, stimulus, step, k5y, k5v);
            yt = y_ + dt * (a61 * k1y + a62 * k2y + a63 * k3y + a64 * k4y + a65 * k5y);
            vt = v_ + dt * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v);
            derivative(th0 + hdt, yt, vt, 0, stimulus, step, k6y, k6v);
            y5 = y_ + dt * (b1 * k1y + b3 * k3y + b4 * k4y + b5 * k5y + b6 * k6y);
            v5 = v_ + dt * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v);
            derivative(th0 + hdt, y5, v5, 0, stimulus, step, k7y, k7v);

            // embedded error estimate on v
            double err = 0.0;
            int worst = 0;
            for (int n = 0; n < p_.N; ++n) {
                const double ev = dt * (e1 * k1v(n) + e3 * k3v(n) + e4 * k4v(n) +
                                        e5 * k5v(n) + e6 * k6v(n) + e7 * k7v(n));
                const double scale =
                    cfg_.rk_atol + cfg_.rk_rtol * std::max(std::abs(v_(n)), std::abs(v5(n)));
                const double e = std::abs(ev) / scale;
                if (e > err) {
                    err = e;
                    worst = n;
                }
            }
            if (err <= 1.0 || dt <= dt_ / 64.0 + 1e-30) {
                if (err > 1.0 && dt <= dt_ / 64.0 + 1e-30) {
                    std::ostringstream msg;
                    msg << "rk45: step underflow at t=" << (step * dt_ + t_loc)
                        << " worst section " << worst << " err " << err;
                    throw StiffnessError(msg.str());
                }
                y_ = y5;
                v_ = v5;
                t_loc += dt;
                const double grow =
                    (err > 0.0) ? std::min(2.0, 0.9 * std::pow(err, -0.2)) : 2.0;
                dt = std::min(dt * std::max(grow, 1.0), dt_);
                dt_try = dt;
            } else {
                dt *= 0.5;
                if (dt < dt_ / 64.0)
                    throw StiffnessError("rk45: dt underflow (section " +
                                         std::to_string(worst) + ")");
            }
        }
        commit_step(stimulus, step);
    }
    return tr;
}

KneeCalibration calibrate_knees(const ModelParams& p, const TLConfig& cfg, Mode mode,
                                const FilterLUT* lut, double cf_hz) {
    if (std::abs(1.0 - p.a) < 1e-6)
        throw CalibrationError("compression slope a = 1: knee lines do not intersect");
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = cf_hz;
    spec.level_db = cfg.i_knee1_db;
    spec.duration_s = 0.02;
    spec.ramp_s = 0.002;
    spec.fs = p.fs;
    const std::vector<double> tone = gen_stimulus(spec);

    auto steady_db = [&](RunOptions::Pole pole, std::optional<double> fixed_G) {
        Simulator sim(p, cfg, mode, lut);
        RunOptions ro;
        ro.pole = pole;
        ro.fixed_G = (mode == Mode::vstar) ? fixed_G : std::nullopt;
        ro.sections = {sim.section_of_cf(cf_hz)};
        ro.record_g = false;
        const Traces tr = sim.run(tone, ro);
        const std::size_t n = tr.v[0].size();
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = n / 2; i < n; ++i, ++cnt) acc += tr.v[0][i] * tr.v[0][i];
        const double rms = std::sqrt(acc / std::max<std::size_t>(cnt, 1));
        if (rms <= 0.0) throw CalibrationError("calibration run produced no response");
        return 20.0 * std::log10(rms);
    };

    KneeCalibration k;
    k.i_knee1_db = cfg.i_knee1_db;
    k.c_start = steady_db(RunOptions::Pole::start, p.G_max) - cfg.i_knee1_db;
    k.c_sat = steady_db(RunOptions::Pole::sat, p.G_min) - cfg.i_knee1_db;
    k.v_knee1_db = k.i_knee1_db + k.c_start;
    k.i_knee2_db = (k.v_knee1_db - p.a * k.i_knee1_db - k.c_sat) / (1.0 - p.a);
    k.v_knee2_db = k.i_knee2_db + k.c_sat;
    if (k.i_knee2_db <= k.i_knee1_db || k.v_knee2_db <= k.v_knee1_db)
        throw CalibrationError("knee lines do not intersect above the onset level");
    k.v_knee1 = std::pow(10.0, k.v_knee1_db / 20.0);
    k.v_knee2 = std::pow(10.0, k.v_knee2_db / 20.0);
    return k;
}

Traces simulate(const std::vector<double>& stimulus, const ModelParams& p,
                const TLConfig& cfg, Mode mode, const FilterLUT* lut,
                const RunOptions& opts) {
    Simulator sim(p, cfg, mode, lut);
    return sim.run(stimulus, opts);
}

}  // namespace cochlea
