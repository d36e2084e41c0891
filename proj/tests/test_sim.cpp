#include <cmath>
#include <complex>

#include "cochlea/analysis.hpp"
#include "cochlea/errors.hpp"
#include "cochlea/stimulus.hpp"
#include "cochlea/tl_model.hpp"
#include "doctest.h"

using namespace cochlea;

namespace {

ModelParams smoke_params(double fs = 100e3, int n = 250) {
    ModelParams p;
    p.fs = fs;
    p.N = n;
    return p;
}

// Frequency-domain steady state of a frozen-pole linear line; independent
// complex elimination (the oracle for the time-domain solver).
double linear_line_mag(const Simulator& sim, const ModelParams& p, double omega,
                       int probe, double sigma0, double delta, double rho_fb,
                       double psi) {
    const auto& sec = sim.constants();
    const double gamma = sim.gamma();
    using C = std::complex<double>;
    const int N = p.N;
    std::vector<C> sub(N - 1), diag(N), super(N - 1), rhs(N, 0.0), cp(N - 1), d(N);
    const C s(0.0, omega);
    std::vector<C> den(N);
    for (int n = 0; n < N; ++n) {
        const double wn = sec[n].omega_n;
        const C Dt = s * s + delta * wn * s +
                     wn * wn * (1.0 - rho_fb * std::exp(-psi * s / wn));
        den[n] = Dt;
        diag[n] = ((n == 0) ? 1.0 + gamma
                            : 1.0 + gamma * (1.0 + sec[n - 1].omega_n / wn)) -
                  (1.0 + omega * omega / Dt);
        if (n < N - 1) super[n] = -gamma * wn / sec[n + 1].omega_n;
        if (n > 0) sub[n - 1] = -gamma;
    }
    rhs[0] = sigma0;
    cp[0] = super[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int i = 1; i < N; ++i) {
        const C m = diag[i] - sub[i - 1] * cp[i - 1];
        if (i < N - 1) cp[i] = super[i] / m;
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
    }
    std::vector<C> q(N);
    q[N - 1] = d[N - 1];
    for (int i = N - 2; i >= 0; --i) q[i] = d[i] - cp[i] * q[i + 1];
    return std::abs(s * q[probe] / den[probe]);
}

double steady_rms_local(const std::vector<double>& v) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = v.size() / 2; i < v.size(); ++i, ++cnt) acc += v[i] * v[i];
    return std::sqrt(acc / cnt);
}

FilterLUT zero_lut(const ModelParams& p) {
    FilterLUT lut;
    lut.n_sections = p.N;
    lut.n_g = 30;
    lut.K = p.K;
    lut.G_min = p.G_min;
    lut.G_max = p.G_max;
    lut.b.assign(std::size_t(p.N) * 30 * p.K, 0.0);
    lut.eps.assign(std::size_t(p.N) * 30, 0.0);
    const SectionMap map = section_positions(p);
    lut.omega_bm.resize(p.N);
    for (int n = 0; n < p.N; ++n) lut.omega_bm[n] = omega_bm_of(2 * M_PI * map.cf[n]);
    return lut;
}

}  // namespace

TEST_CASE("zero input stays at equilibrium") {
    const ModelParams p = smoke_params();
    Simulator sim(p, TLConfig{}, Mode::v1d);
    RunOptions ro;
    ro.pole = RunOptions::Pole::start;
    ro.sections = {0, 100, 200};
    const Traces tr = sim.run(std::vector<double>(400, 0.0), ro);
    for (const auto& col : tr.v)
        for (double x : col) CHECK(x == 0.0);
    for (const auto& col : tr.y)
        for (double x : col) CHECK(x == 0.0);
}

TEST_CASE("passive tone matches the frequency-domain oracle") {
    const ModelParams p = smoke_params();
    const TLConfig cfg;
    Simulator sim(p, cfg, Mode::v1d);
    for (double f : {3000.0, 8000.0}) {
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
        const Traces tr = sim.run(gen_stimulus(spec), ro);
        const double sigma0 =
            cfg.drive_scale * cfg.stim_scale * std::pow(10.0, spec.level_db / 20.0);
        const double mag =
            linear_line_mag(sim, p, 2.0 * M_PI * f, probe, sigma0, 1.0, 0.0, 10.9);
        const double rel = std::abs(steady_rms_local(tr.v[0]) * std::sqrt(2.0) - mag) / mag;
        CHECK(rel < 0.01);
    }
}

TEST_CASE("active linear line also matches the oracle") {
    const ModelParams p = smoke_params();
    const TLConfig cfg;
    Simulator sim(p, cfg, Mode::v1d);
    const double f = 10000.0;
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = f;
    spec.level_db = 40.0;
    spec.duration_s = 0.04;
    spec.ramp_s = 0.005;
    spec.fs = p.fs;
    const int probe = sim.section_of_cf(f);
    RunOptions ro;
    ro.pole = RunOptions::Pole::start;
    ro.sections = {probe};
    const Traces tr = sim.run(gen_stimulus(spec), ro);
    const double sigma0 =
        cfg.drive_scale * cfg.stim_scale * std::pow(10.0, spec.level_db / 20.0);

    // same elimination as linear_line_mag but with per-section start triplets
    const double mag = [&] {
        const auto& cs = sim.constants();
        using C = std::complex<double>;
        const int N = p.N;
        const double gamma = sim.gamma();
        std::vector<C> sub(N - 1), diag(N), super(N - 1), rhs(N, 0.0), cp(N - 1), d(N);
        const C s(0.0, 2.0 * M_PI * f);
        std::vector<C> den(N);
        for (int n = 0; n < N; ++n) {
            const double wn = cs[n].omega_n;
            const PoleTriplet tn = sim.pole_table().at(cs[n].xi_start);
            const C Dt = s * s + tn.delta * wn * s +
                         wn * wn * (1.0 - tn.rho * std::exp(-tn.psi * s / wn));
            den[n] = Dt;
            diag[n] = ((n == 0) ? 1.0 + gamma
                                : 1.0 + gamma * (1.0 + cs[n - 1].omega_n / wn)) -
                      (1.0 + (2.0 * M_PI * f) * (2.0 * M_PI * f) / Dt);
            if (n < N - 1) super[n] = -gamma * wn / cs[n + 1].omega_n;
            if (n > 0) sub[n - 1] = -gamma;
        }
        rhs[0] = sigma0;
        cp[0] = super[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for (int i = 1; i < N; ++i) {
            const C m = diag[i] - sub[i - 1] * cp[i - 1];
            if (i < N - 1) cp[i] = super[i] / m;
            d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / m;
        }
        std::vector<C> q(N);
        q[N - 1] = d[N - 1];
        for (int i = N - 2; i >= 0; --i) q[i] = d[i] - cp[i] * q[i + 1];
        return std::abs(s * q[probe] / den[probe]);
    }();
    const double rel = std::abs(steady_rms_local(tr.v[0]) * std::sqrt(2.0) - mag) / mag;
    CHECK(rel < 0.02);
}

TEST_CASE("linear-regime amplitude scaling") {
    const ModelParams p = smoke_params();
    Simulator sim(p, TLConfig{}, Mode::v1d);
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = 6000.0;
    spec.level_db = 30.0;
    spec.duration_s = 0.02;
    spec.fs = p.fs;
    RunOptions ro;
    ro.pole = RunOptions::Pole::start;
    ro.sections = {sim.section_of_cf(6000.0)};
    const Traces lo = sim.run(gen_stimulus(spec), ro);
    spec.level_db = 30.0 + 20.0 * std::log10(2.0);
    const Traces hi = sim.run(gen_stimulus(spec), ro);
    for (std::size_t i = lo.v[0].size() / 2; i < lo.v[0].size(); ++i) {
        if (std::abs(lo.v[0][i]) < 1e-12) continue;
        CHECK(hi.v[0][i] == doctest::Approx(2.0 * lo.v[0][i]).epsilon(0.01));
    }
}

TEST_CASE("correction path with zero coefficients is bit-identical to v1d") {
    const ModelParams p = smoke_params(200e3, 120);
    TLConfig cfg;
    cfg.v_knee1 = 1e-6;
    cfg.v_knee2 = 1e-3;
    const FilterLUT lut = zero_lut(p);
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = 15000.0;
    spec.level_db = 50.0;
    spec.duration_s = 0.008;
    spec.fs = p.fs;
    const std::vector<double> tone = gen_stimulus(spec);
    Simulator v1d(p, cfg, Mode::v1d);
    Simulator vstar(p, cfg, Mode::vstar, &lut);
    RunOptions ro;
    ro.sections = {v1d.section_of_cf(15000.0), v1d.section_of_cf(25000.0)};
    const Traces a = v1d.run(tone, ro);
    const Traces b = vstar.run(tone, ro);
    REQUIRE(a.v[0].size() == b.v[0].size());
    for (std::size_t i = 0; i < a.v[0].size(); ++i) {
        CHECK(a.v[0][i] == b.v[0][i]);
        CHECK(a.v[1][i] == b.v[1][i]);
    }
}

TEST_CASE("tolerance self-convergence") {
    const ModelParams p = smoke_params(100e3, 120);
    StimulusSpec spec;
    spec.kind = StimulusKind::tone;
    spec.freq_hz = 5000.0;
    spec.level_db = 40.0;
    spec.duration_s = 0.02;
    spec.fs = p.fs;
    const std::vector<double> tone = gen_stimulus(spec);
    auto rms_with = [&](double rtol) {
        TLConfig cfg;
        cfg.rk_rtol = rtol;
        Simulator sim(p, cfg, Mode::v1d);
        RunOptions ro;
        ro.pole = RunOptions::Pole::passive;
        ro.sections = {sim.section_of_cf(5000.0)};
        return steady_rms_local(sim.run(tone, ro).v[0]);
    };
    const double r1 = rms_with(1e-6);
    const double r2 = rms_with(5e-7);
    CHECK(std::abs(r1 - r2) / r2 < 1e-3);
}

TEST_CASE("passive click envelope decays after the direct wave") {
    const ModelParams p = smoke_params();
    Simulator sim(p, TLConfig{}, Mode::v1d);
    StimulusSpec spec;
    spec.kind = StimulusKind::click;
    spec.level_db = 60.0;
    spec.click_onset_s = 0.5e-3;
    spec.duration_s = 0.01;
    spec.fs = p.fs;
    RunOptions ro;
    ro.pole = RunOptions::Pole::passive;
    ro.sections = {sim.section_of_cf(8000.0)};
    const Traces tr = sim.run(gen_stimulus(spec), ro);
    const auto& v = tr.v[0];
    // peak of |v| over consecutive 2 ms windows decays once the wave passed
    // (apex reflections modulate the tail, hence the window size and slack)
    const int w = static_cast<int>(2e-3 * p.fs);
    double prev = -1.0;
    int start = static_cast<int>(1.5e-3 * p.fs);
    bool decaying = true;
    for (int i = start; i + w <= static_cast<int>(v.size()); i += w) {
        double mx = 0.0;
        for (int j = i; j < i + w; ++j) mx = std::max(mx, std::abs(v[j]));
        if (prev >= 0.0 && mx > prev * 1.05) decaying = false;
        prev = mx;
    }
    CHECK(decaying);
}

TEST_CASE("chirp-derived magnitude matches tone probes on the linear line") {
    const ModelParams p = smoke_params(100e3, 150);
    const TLConfig cfg;
    StimulusSpec chirp;
    chirp.kind = StimulusKind::chirp;
    chirp.f_start_hz = 3000.0;
    chirp.f_end_hz = 9000.0;
    chirp.duration_s = 0.08;
    chirp.ramp_s = 4e-3;
    chirp.level_db = 40.0;
    chirp.fs = p.fs;
    Simulator sim(p, cfg, Mode::v1d);
    const int probe = sim.section_of_cf(6000.0);
    RunOptions ro;
    ro.pole = RunOptions::Pole::start;
    ro.sections = {probe};
    ro.record_g = false;
    const Traces ctr = sim.run(gen_stimulus(chirp), ro);
    const AnalysisResult fr =
        sliding_gaussian_response(ctr.v[0], chirp, 1.5e-3, 40);

    for (double f : {5000.0, 6500.0}) {
        StimulusSpec tone;
        tone.kind = StimulusKind::tone;
        tone.freq_hz = f;
        tone.level_db = 40.0;
        tone.duration_s = 0.03;
        tone.ramp_s = 0.004;
        tone.fs = p.fs;
        const Traces ttr = sim.run(gen_stimulus(tone), ro);
        const double tone_db =
            20.0 * std::log10(steady_rms_local(ttr.v[0]) * std::sqrt(2.0)) -
            tone.level_db;
        // nearest chirp-analysis bin; RMS convention differs by sqrt(2)
        double best = 1e9, got = 0.0;
        for (std::size_t i = 0; i < fr.freqs.size(); ++i) {
            if (std::abs(fr.freqs[i] - f) < best) {
                best = std::abs(fr.freqs[i] - f);
                got = fr.mag_db[i] + 20.0 * std::log10(std::sqrt(2.0));
            }
        }
        CHECK(std::abs(got - tone_db) < 0.5);
    }
}

TEST_CASE("nonlinear run requires calibrated knees") {
    const ModelParams p = smoke_params();
    Simulator sim(p, TLConfig{}, Mode::v1d);  // knees unset
    CHECK_THROWS_AS(sim.run(std::vector<double>(64, 0.0), RunOptions{}), ConfigError);
}

TEST_CASE("stimulus calibration shift moves level anchors, not knee velocities") {
    const ModelParams p = smoke_params(100e3, 150);
    TLConfig cfg;
    const KneeCalibration a = calibrate_knees(p, cfg, Mode::v1d);
    TLConfig shifted = cfg;
    shifted.stim_scale = cfg.stim_scale * std::pow(10.0, -6.0 / 20.0);
    shifted.i_knee1_db = cfg.i_knee1_db + 6.0;
    const KneeCalibration b = calibrate_knees(p, shifted, Mode::v1d);
    CHECK(b.v_knee1_db == doctest::Approx(a.v_knee1_db).epsilon(1e-6));
    CHECK(b.v_knee2_db == doctest::Approx(a.v_knee2_db).epsilon(1e-6));
    CHECK(b.i_knee1_db == doctest::Approx(a.i_knee1_db + 6.0));
    CHECK(b.i_knee2_db == doctest::Approx(a.i_knee2_db + 6.0).epsilon(1e-6));
}
