#include "cochlea/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "cochlea/analysis.hpp"
#include "cochlea/errors.hpp"
#include "cochlea/filter_design.hpp"
#include "cochlea/harness.hpp"
#include "cochlea/lut.hpp"
#include "cochlea/params.hpp"
#include "cochlea/rbf.hpp"
#include "cochlea/stimulus.hpp"
#include "cochlea/tl_model.hpp"
#include "cochlea/trace_io.hpp"
#include "cochlea/wkb.hpp"

namespace cochlea {

namespace {

namespace fs = std::filesystem;

struct GrowthPair {
    GrowthResult v1d, vstar;
    bool computed = false;
};

struct Context {
    AcceptanceOptions opts;
    std::ostream* log = nullptr;
    GrowthPair growth;

    ModelParams full;          // N=1000, fs=200k
    ModelParams smoke;         // N=250,  fs=200k (LUT-backed sim criteria)
    ModelParams smoke100;      // N=250,  fs=100k (solver oracle criterion)
    TLConfig cfg;

    RbfNet net_full, net_smoke;
    FilterLUT lut_full, lut_smoke;
    bool have_full = false, have_smoke = false;

    TLConfig cal_v1d, cal_vstar;   // knee-calibrated configs (smoke line)
    bool have_cal = false;

    void prepare_full() {
        if (have_full) return;
        net_full = trained_net(full, "full");
        lut_full = build_lut(net_full, full);
        have_full = true;
    }
    void prepare_smoke() {
        if (have_smoke) return;
        net_smoke = trained_net(smoke, "smoke");
        lut_smoke = build_lut(net_smoke, smoke);
        have_smoke = true;
    }
    void prepare_calibration() {
        if (have_cal) return;
        prepare_smoke();
        cal_v1d = cfg;
        const KneeCalibration k1 = calibrate_knees(smoke, cfg, Mode::v1d);
        cal_v1d.v_knee1 = k1.v_knee1;
        cal_v1d.v_knee2 = k1.v_knee2;
        cal_vstar = cfg;
        const KneeCalibration k2 =
            calibrate_knees(smoke, cfg, Mode::vstar, &lut_smoke);
        cal_vstar.v_knee1 = k2.v_knee1;
        cal_vstar.v_knee2 = k2.v_knee2;
        have_cal = true;
        *log << "  calibration: v1d knees (" << k1.v_knee1_db << ", " << k1.v_knee2_db
             << ") dB over levels (" << k1.i_knee1_db << ", " << k1.i_knee2_db
             << "); vstar knees (" << k2.v_knee1_db << ", " << k2.v_knee2_db
             << ") dB over levels (" << k2.i_knee1_db << ", " << k2.i_knee2_db << ")\n";
    }

  private:
    RbfNet trained_net(const ModelParams& p, const std::string& tag) {
        if (!opts.cache_dir.empty()) {
            const fs::path f = fs::path(opts.cache_dir) /
                               ("rbf_" + tag + "_seed" + std::to_string(opts.seed) + ".json");
            if (fs::exists(f)) {
                *log << "  using cached net " << f.string() << "\n";
                return load_rbf(f.string());
            }
            TrainOptions to;
            to.seed = opts.seed;
            TrainReport rep;
            RbfNet net = train_rbf(p, to, &rep);
            *log << "  trained " << tag << " net: stage1 loss " << rep.stage1_first_mean
                 << " -> " << rep.stage1_last_mean << ", stage2 " << rep.stage2_first_mean
                 << " -> " << rep.stage2_last_mean << "\n";
            fs::create_directories(opts.cache_dir);
            save_rbf(net, f.string());
            return net;
        }
        TrainOptions to;
        to.seed = opts.seed;
        return train_rbf(p, to);
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// ---- criterion 1: DC gain over every LUT entry -----------------------------

CriterionResult crit_dc(Context& c) {
    c.prepare_full();
    double worst = 0.0;
    const FilterLUT& lut = c.lut_full;
    for (std::uint32_t n = 0; n < lut.n_sections; ++n) {
        for (std::uint32_t g = 0; g < lut.n_g; ++g) {
            const double* b = lut.entry_b(n, g);
            double sum = 0.0;
            for (std::uint32_t k = 0; k < lut.K; ++k) sum += b[k];
            const double bhat0 = (1.0 + lut.entry_eps(n, g)) / (1.0 - sum);
            worst = std::max(worst, std::abs(bhat0 - 1.0));
        }
    }
    return {1, "dc-gain |beta_hat(0)-1| < 1e-9 over 1000x30 entries", worst < 1e-9,
            "worst " + fmt(worst)};
}

// ---- criterion 2: pole radius sweep ----------------------------------------

CriterionResult crit_stability(Context& c) {
    c.prepare_full();
    const FilterLUT& lut = c.lut_full;
    double worst = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : worst)
    for (int n = 0; n < static_cast<int>(lut.n_sections); ++n) {
        for (std::uint32_t g = 0; g < lut.n_g; ++g) {
            PoleFilter f;
            f.b = Eigen::Map<const Eigen::VectorXd>(lut.entry_b(n, g), lut.K);
            f.eps = lut.entry_eps(n, g);
            worst = std::max(worst, max_pole_radius(f));
        }
    }
    return {2, "stability sweep: all LUT poles |z| <= 0.999", worst <= 0.999,
            "max pole radius " + fmt(worst)};
}

// ---- criterion 3: regression fidelity on a held-out grid -------------------

CriterionResult crit_fidelity(Context& c) {
    c.prepare_full();
    const RbfNet& net = c.net_full;
    const ModelParams& p = c.full;
    double worst_dev = 0.0;
    double mean_enh = 0.0, mean_red = 0.0;
    int n_enh = 0, n_red = 0;
    const int side = 10;
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            // offset grid: between training-net centers, inside the bounds
            const double u1 = (i + 0.5) / side;
            const double u2 = (j + 0.5) / side;
            const double omega_bm =
                net.omega_bm_min + u1 * (net.omega_bm_max - net.omega_bm_min);
            const double G = p.G_min + u2 * (p.G_max - p.G_min);
            const ComplexSpectrum beta = beta_target(omega_bm, G, p);
            PoleFilter f;
            f.b = rbf_forward(net, omega_bm, G);
            f.eps = -f.b.sum();
            // extremum of ||beta|-1| over the response-relevant band f <= f_bm
            // (the omega_cut edge rows are evanescent for the section)
            const double f_cut = omega_bm / (2.0 * M_PI);
            int m_star = 1;
            double dev_star = 0.0;
            for (std::size_t m = 1; m < beta.freqs.size() && beta.freqs[m] < f_cut; ++m) {
                const double d = std::abs(std::abs(beta.values[m]) - 1.0);
                if (d > dev_star) {
                    dev_star = d;
                    m_star = static_cast<int>(m);
                }
            }
            const double target = std::abs(beta.values[m_star]);
            const double got =
                std::abs(beta_hat(f, 2.0 * M_PI * beta.freqs[m_star], p.fs));
            const double dev = (got - target) / target;
            worst_dev = std::max(worst_dev, std::abs(dev));
            if (target > 1.0) {
                mean_enh += dev;
                ++n_enh;
            } else {
                mean_red += dev;
                ++n_red;
            }
        }
    }
    mean_enh /= std::max(n_enh, 1);
    mean_red /= std::max(n_red, 1);
    const bool pass = worst_dev <= 0.30 && mean_enh < 0.0 && mean_red > 0.0;
    return {3, "regression fidelity <= 30% at peak with shrinkage bias", pass,
            "worst dev " + fmt(worst_dev) + ", mean dev enh " + fmt(mean_enh) +
                " (" + std::to_string(n_enh) + "), red " + fmt(mean_red) + " (" +
                std::to_string(n_red) + ")"};
}

// ---- criterion 4: WKB limits ------------------------------------------------

CriterionResult crit_wkb(Context& c) {
    const ModelParams& p = c.full;
    double worst_small = 0.0, worst_large = 0.0, worst_res = 0.0;
    for (int i = 1; i <= 40; ++i) {
        const double m = 1e-3 * i / 40.0;
        for (double ph = 0.0; ph < 2.0 * M_PI; ph += M_PI / 7) {
            const cplx kh = std::polar(m, ph);
            worst_small = std::max(worst_small, std::abs(pressure_focusing(kh) - 1.0));
        }
        const double big = 10.0 + 30.0 * i;
        worst_large =
            std::max(worst_large, std::abs(pressure_focusing(cplx(big, 0.0)) / big - 1.0));
    }
    for (double fbm : {2000.0, 8000.0, 25500.0, 61000.0}) {
        for (double G : {p.G_min, p.G_ref, p.G_max}) {
            cplx warm;
            bool have_warm = false;
            for (int m = 1; m < p.m2; m += 3) {
                const double f = m * p.fs / (2.0 * p.m2);
                const DispersionSolution s =
                    solve_dispersion(2.0 * M_PI * f, 2.0 * M_PI * fbm, G, p, 1e-8, 200,
                                     have_warm ? &warm : nullptr);
                warm = s.kappa;
                have_warm = true;
                worst_res = std::max(worst_res, s.residual);
            }
        }
    }
    const bool pass = worst_small < 1e-6 && worst_large < 1e-3 && worst_res <= 1e-8;
    return {4, "wkb limits: alpha->1, alpha->kH, residual <= 1e-8", pass,
            "small " + fmt(worst_small) + ", large " + fmt(worst_large) + ", residual " +
                fmt(worst_res)};
}

// ---- criterion 5: solver oracles ---------------------------------------------

// Independent dense solve for random tridiagonal systems.
double tridiag_vs_dense() {
    std::mt19937_64 rng(12345);
    auto u = [&] { return (rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 16;
        Eigen::VectorXd sub(n - 1), diag(n), super(n - 1), rhs(n);
        for (int i = 0; i < n; ++i) {
            diag(i) = 4.0 + u();
            rhs(i) = u();
        }
        for (int i = 0; i < n - 1; ++i) {
            sub(i) = u();
            super(i) = u();
        }
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            A(i, i) = diag(i);
            if (i > 0) A(i, i - 1) = sub(i - 1);
            if (i < n - 1) A(i, i + 1) = super(i);
        }
        const Eigen::VectorXd x_dense = A.partialPivLu().solve(rhs);
        const Eigen::VectorXd x_thomas = solve_pressure(sub, diag, super, rhs);
        worst = std::max(worst, (x_dense - x_thomas).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

// Frequency-domain steady state of the passive line (independent of the
// time-domain path; complex elimination written out directly here).
double oracle_passive_mag(const Simulator& sim, const ModelParams& p, double gamma,
                          double omega, int probe, double sigma0) {
    const auto& sec = sim.constants();
    const int N = p.N;
    using C = std::complex<double>;
    std::vector<C> sub(N - 1), diag(N), super(N - 1), rhs(N, 0.0), q(N);
    const C s(0.0, omega);
    std::vector<C> den(N);
    for (int n = 0; n < N; ++n) {
        const double wn = sec[n].omega_n;
        const C Dt = s * s + 1.0 * wn * s + wn * wn;  // passive: delta=1, rho=0
        den[n] = Dt;
        const C sn = 1.0 + omega * omega / Dt;
        diag[n] = ((n == 0) ? 1.0 + gamma
                            : 1.0 + gamma * (1.0 + sec[n - 1].omega_n / wn)) -
                  sn;
        if (n < N - 1) super[n] = -gamma * wn / sec[n + 1].omega_n;
        if (n > 0) sub[n - 1] = -gamma;
    }
    rhs[0] = sigma0;
    std::vector<C> cp(N - 1);
    std::vector<C> d(N);
    cp[0] = super[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int i = 1; i < N; ++i) {
        const C m = diag[i] - sub[i - 1] * cp[i - 1];
        if (i < N - 1) cp[i] = super[i] / m;
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    q[N - 1] = d[N - 1];
    for (int i = N - 2; i >= 0; --i) q[i] = d[i] - cp[i] * q[i + 1];
    return std::abs(s * q[probe] / den[probe]);
}

CriterionResult crit_solver_oracles(Context& c) {
    const double worst_tri = tridiag_vs_dense();

    const ModelParams& p = c.smoke100;
    Simulator sim(p, c.cfg, Mode::v1d);
    double worst_rel = 0.0;
    std::string per;
    for (double f : {2000.0, 5000.0, 8000.0}) {
        StimulusSpec spec;
        spec.kind = StimulusKind::tone;
        spec.freq_hz = f;
        spec.level_db = 40.0;
        spec.duration_s = 0.03;
        spec.ramp_s = 0.005;
        spec.fs = p.fs;
        const int probe = sim.section_of_cf(f);
        RunOptions ro;
        ro.pole = RunOptions::Pole::passive;
        ro.sections = {probe};
        ro.record_g = false;
        const Traces tr = sim.run(gen_stimulus(spec), ro);
        const double rms = steady_rms(tr.v[0]);
        const double sigma0 = c.cfg.drive_scale * c.cfg.stim_scale *
                              std::pow(10.0, spec.level_db / 20.0);
        const double mag = oracle_passive_mag(sim, p, sim.gamma(), 2.0 * M_PI * f,
                                              probe, sigma0);
        const double rel = std::abs(rms * std::sqrt(2.0) - mag) / mag;
        worst_rel = std::max(worst_rel, rel);
        per += " " + fmt(f) + "Hz:" + fmt(rel * 100.0) + "%";
    }
    const bool pass = worst_tri < 1e-10 && worst_rel < 0.01;
    return {5, "solver oracles: dense tridiagonal + passive frequency response", pass,
            "tridiag max err " + fmt(worst_tri) + "; passive rel err" + per +
                " (N=250, fs=100 kHz)"};
}

// ---- criteria 6/7: growth functions ------------------------------------------

GrowthPair& growth_pair(Context& c) {
    GrowthPair& gp = c.growth;
    if (gp.computed) return gp;
    c.prepare_calibration();
    std::vector<double> levels;
    for (double L = 0.0; L <= 100.0; L += 2.5) levels.push_back(L);
    gp.v1d = growth_function(c.smoke, c.cal_v1d, Mode::v1d, nullptr, 20000.0, levels);
    gp.vstar =
        growth_function(c.smoke, c.cal_vstar, Mode::vstar, &c.lut_smoke, 20000.0, levels);
    gp.computed = true;
    *c.log << "  growth v1d: slope_low " << gp.v1d.slope_low << ", slope_mid "
           << gp.v1d.slope_mid << ", span " << gp.v1d.span_db << " dB ["
           << gp.v1d.span_lo_db << ", " << gp.v1d.span_hi_db << "], depth "
           << gp.v1d.compression_depth_db << " dB\n";
    *c.log << "  growth vstar: slope_low " << gp.vstar.slope_low << ", slope_mid "
           << gp.vstar.slope_mid << ", span " << gp.vstar.span_db << " dB ["
           << gp.vstar.span_lo_db << ", " << gp.vstar.span_hi_db << "], depth "
           << gp.vstar.compression_depth_db << " dB\n";
    return gp;
}

CriterionResult crit_growth(Context& c) {
    const GrowthPair& gp = growth_pair(c);
    const bool slope_ok = std::abs(gp.v1d.slope_low - 1.0) <= 0.02 &&
                          std::abs(gp.vstar.slope_low - 1.0) <= 0.02;
    const bool mid_ok = std::abs(gp.v1d.slope_mid - 0.45) <= 0.05 &&
                        std::abs(gp.vstar.slope_mid - 0.45) <= 0.05;
    const bool span_ok = gp.v1d.span_db < 30.0 &&
                         gp.vstar.span_db >= gp.v1d.span_db + 5.0;
    return {6, "growth: slopes 1.00/0.45, v1d span < 30 dB, vstar span +>= 5 dB",
            slope_ok && mid_ok && span_ok,
            "slope_low v1d " + fmt(gp.v1d.slope_low) + " vstar " +
                fmt(gp.vstar.slope_low) + ", slope_mid v1d " + fmt(gp.v1d.slope_mid) +
                " vstar " + fmt(gp.vstar.slope_mid) +
                ", spans v1d " + fmt(gp.v1d.span_db) + " dB / vstar " +
                fmt(gp.vstar.span_db) + " dB (extension " +
                fmt(gp.vstar.span_db - gp.v1d.span_db) + " dB)"};
}

CriterionResult crit_peak_gain(Context& c) {
    const GrowthPair& gp = growth_pair(c);
    const double extra = gp.vstar.compression_depth_db - gp.v1d.compression_depth_db;
    return {7, "peak-gain compensation: vstar compression depth >= v1d + 3 dB",
            extra >= 3.0,
            "depth v1d " + fmt(gp.v1d.compression_depth_db) + " dB, vstar " +
                fmt(gp.vstar.compression_depth_db) + " dB, extra " + fmt(extra) + " dB"};
}

// ---- criterion 8: update-rate study -----------------------------------------

// Click magnitude spectrum at the probe section via a plain DFT.
std::vector<double> click_spectrum(const std::vector<double>& v, double fs,
                                   const std::vector<double>& freqs) {
    std::vector<double> mag(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j)
            acc += v[j] * std::exp(std::complex<double>(0.0, -2.0 * M_PI * freqs[i] * j / fs));
        mag[i] = 20.0 * std::log10(std::max(std::abs(acc), 1e-300));
    }
    return mag;
}

CriterionResult crit_update_rate(Context& c) {
    c.prepare_calibration();
    const ModelParams& p = c.smoke;
    StimulusSpec spec;
    spec.kind = StimulusKind::click;
    spec.level_db = 60.0;
    spec.click_onset_s = 0.5e-3;
    spec.duration_s = 0.008;
    spec.fs = p.fs;
    const std::vector<double> click = gen_stimulus(spec);

    std::vector<double> freqs;
    for (double f = 10000.0; f <= 24000.0; f += 500.0) freqs.push_back(f);

    std::vector<std::vector<double>> mags;
    for (int period : {1, 6, 12}) {
        TLConfig cfg = c.cal_vstar;
        cfg.update_period = period;
        Simulator sim(p, cfg, Mode::vstar, &c.lut_smoke);
        RunOptions ro;
        ro.sections = {sim.section_of_cf(20000.0)};
        const Traces tr = sim.run(click, ro);
        mags.push_back(click_spectrum(tr.v[0], p.fs, freqs));
    }
    // compare within 30 dB of the baseline peak
    const double pk = *std::max_element(mags[0].begin(), mags[0].end());
    double dev6 = 0.0, dev12 = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (mags[0][i] < pk - 30.0) continue;
        dev6 = std::max(dev6, std::abs(mags[1][i] - mags[0][i]));
        dev12 = std::max(dev12, std::abs(mags[2][i] - mags[0][i]));
    }
    return {8, "update-rate: 0.03 ms within 1.5 dB of 0.005 ms near CF", dev6 <= 1.5,
            "max dev 0.03 ms " + fmt(dev6) + " dB; 0.06 ms " + fmt(dev12) +
                " dB (reported)"};
}

// ---- criterion 9: zero-crossing near-invariance -------------------------------

CriterionResult crit_zero_crossings(Context& c) {
    c.prepare_calibration();
    const ModelParams& p = c.smoke;
    const double cf = 20000.0;
    // The invariance property belongs to the pole trajectory, so the bound is
    // applied to the v1d path; the correction filters add a level-dependent
    // phase on top, reported but not bounded.
    auto worst_shift = [&](Mode mode) {
        std::vector<std::vector<double>> crossings;
        double t_anchor = -1.0;
        for (double level = 20.0; level <= 80.0; level += 10.0) {
            StimulusSpec spec;
            spec.kind = StimulusKind::click;
            spec.level_db = level;
            spec.click_onset_s = 0.5e-3;
            spec.duration_s = 0.006;
            spec.fs = p.fs;
            Simulator sim(p, mode == Mode::vstar ? c.cal_vstar : c.cal_v1d, mode,
                          mode == Mode::vstar ? &c.lut_smoke : nullptr);
            RunOptions ro;
            ro.sections = {sim.section_of_cf(cf)};
            ro.record_g = false;
            const Traces tr = sim.run(gen_stimulus(spec), ro);
            // count from the arrival at the most sensitive level so the same
            // cycles are compared: heavier damping reshapes the onset and a
            // per-level threshold can slip by a half period
            const auto& v = tr.v[0];
            if (t_anchor < 0.0) {
                double vmax = 0.0;
                for (double x : v) vmax = std::max(vmax, std::abs(x));
                int i0 = 0;
                while (i0 < static_cast<int>(v.size()) && std::abs(v[i0]) < 0.05 * vmax)
                    ++i0;
                t_anchor = (i0 - 2) / p.fs;
            }
            crossings.push_back(zero_crossings(v, p.fs, t_anchor, 5));
        }
        double worst = 0.0;
        for (std::size_t l = 1; l < crossings.size(); ++l) {
            for (std::size_t i = 0; i < 5 && i < crossings[l].size() &&
                                    i < crossings[0].size();
                 ++i)
                worst = std::max(worst, std::abs(crossings[l][i] - crossings[0][i]));
        }
        return worst;
    };
    const double w_v1d = worst_shift(Mode::v1d);
    const double w_vstar = worst_shift(Mode::vstar);
    const double period = 1.0 / cf;
    return {9, "zero-crossing near-invariance over 20-80 dB clicks",
            w_v1d < 0.05 * period,
            "v1d max shift " + fmt(w_v1d * 1e6) + " us vs 5% of period = " +
                fmt(0.05 * period * 1e6) + " us; vstar " + fmt(w_vstar * 1e6) +
                " us (correction-filter phase, reported)"};
}

// ---- criterion 10: determinism -------------------------------------------------

CriterionResult crit_determinism(Context& c) {
    c.prepare_calibration();
    const ModelParams& p = c.smoke;
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = 20000.0;
    spec.level_db = 55.0;
    spec.duration_s = 0.01;
    spec.fs = p.fs;
    const std::vector<double> tone = gen_stimulus(spec);
    const fs::path dir =
        c.opts.cache_dir.empty() ? fs::temp_directory_path() : fs::path(c.opts.cache_dir);
    fs::create_directories(dir);
    const std::string f1 = (dir / "det_a.btrc").string();
    const std::string f2 = (dir / "det_b.btrc").string();
    for (const std::string& f : {f1, f2}) {
        Simulator sim(p, c.cal_vstar, Mode::vstar, &c.lut_smoke);
        RunOptions ro;
        ro.sections = {sim.section_of_cf(20000.0), sim.section_of_cf(10000.0)};
        save_traces_bin(sim.run(tone, ro), f);
    }
    std::ifstream a(f1, std::ios::binary), b(f2, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    const bool same = !sa.empty() && sa == sb;
    return {10, "determinism: identical runs produce bit-identical trace files", same,
            same ? "files identical (" + std::to_string(sa.size()) + " bytes)"
                 : "files differ"};
}

}  // namespace

bool all_passed(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            std::ostream& log) {
    Context c;
    c.opts = opts;
    c.log = &log;
    c.full = ModelParams{};
    c.smoke = ModelParams{};
    c.smoke.N = 250;
    c.smoke100 = c.smoke;
    c.smoke100.fs = 100e3;
    c.cfg = TLConfig{};

    using Fn = CriterionResult (*)(Context&);
    const std::pair<int, Fn> table[] = {
        {1, crit_dc},          {2, crit_stability},   {3, crit_fidelity},
        {4, crit_wkb},         {5, crit_solver_oracles}, {6, crit_growth},
        {7, crit_peak_gain},   {8, crit_update_rate}, {9, crit_zero_crossings},
        {10, crit_determinism},
    };

    std::vector<CriterionResult> out;
    for (const auto& [id, fn] : table) {
        if (!opts.only.empty() &&
            std::find(opts.only.begin(), opts.only.end(), id) == opts.only.end())
            continue;
        CriterionResult r;
        try {
            r = fn(c);
        } catch (const std::exception& e) {
            r.id = id;
            r.name = "criterion " + std::to_string(id);
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        log << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " -- "
            << r.detail << "\n";
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cochlea
