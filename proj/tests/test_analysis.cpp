#include <cmath>

#include "cochlea/analysis.hpp"
#include "cochlea/errors.hpp"
#include "cochlea/stimulus.hpp"
#include "doctest.h"

using namespace cochlea;

TEST_CASE("stimulus generation") {
    SUBCASE("tone sample count and periodicity") {
        StimulusSpec s;
        s.kind = StimulusKind::tone;
        s.freq_hz = 20000.0;
        s.fs = 200e3;
        s.level_db = 0.0;
        s.duration_s = 0.01;
        const auto v = gen_stimulus(s);
        CHECK(v.size() == 2000);
        // 10 samples per period in the plateau
        for (int i = 800; i < 1000; ++i) CHECK(v[i] == doctest::Approx(v[i + 10]));
    }
    SUBCASE("chirp instantaneous frequency at midpoint") {
        StimulusSpec s;
        s.kind = StimulusKind::chirp;
        s.f_start_hz = 5000.0;
        s.f_end_hz = 30000.0;
        s.fs = 200e3;
        s.duration_s = 0.05;
        s.ramp_s = 2e-3;
        const auto v = gen_stimulus(s);
        // numerical instantaneous frequency from zero crossings around T/2
        const auto zc = zero_crossings(v, s.fs, 0.5 * s.duration_s, 9);
        REQUIRE(zc.size() >= 3);
        const double f_inst = 0.5 / (zc[1] - zc[0]);  // half period between crossings
        CHECK(f_inst == doctest::Approx(17500.0).epsilon(0.03));
    }
    SUBCASE("click level scaling") {
        StimulusSpec s;
        s.kind = StimulusKind::click;
        s.fs = 200e3;
        s.duration_s = 0.002;
        s.level_db = 20.0;
        const auto a = gen_stimulus(s);
        s.level_db = 40.0;
        const auto b = gen_stimulus(s);
        const int i = static_cast<int>(0.5e-3 * s.fs);
        CHECK(b[i] == doctest::Approx(10.0 * a[i]));
    }
    SUBCASE("band and ramp violations") {
        StimulusSpec s;
        s.kind = StimulusKind::tone;
        s.freq_hz = 120e3;
        s.fs = 200e3;
        CHECK_THROWS_AS(gen_stimulus(s), ConfigError);
        s.freq_hz = 1000.0;
        s.ramp_s = 0.2e-3;
        CHECK_THROWS_AS(gen_stimulus(s), ConfigError);
    }
}

TEST_CASE("sliding gaussian response") {
    StimulusSpec chirp;
    chirp.kind = StimulusKind::chirp;
    chirp.f_start_hz = 2000.0;
    chirp.f_end_hz = 12000.0;
    chirp.fs = 100e3;
    chirp.duration_s = 0.2;
    chirp.ramp_s = 5e-3;
    chirp.level_db = 30.0;

    SUBCASE("identity system: flat normalized magnitude, level-invariant") {
        const auto trace = gen_stimulus(chirp);
        AnalysisResult r = sliding_gaussian_response(trace, chirp, 2e-3, 60);
        // RMS of a unit sine re: its own amplitude = -3.01 dB, flat across f
        // away from the on/off ramps (window center must clear ramp + 3 sigma)
        const double rate = (chirp.f_end_hz - chirp.f_start_hz) / chirp.duration_s;
        const double t_margin = chirp.ramp_s + 3.0 * 2e-3;
        for (std::size_t i = 0; i < r.freqs.size(); ++i) {
            const double tc = (r.freqs[i] - chirp.f_start_hz) / rate;
            if (tc < t_margin || tc > chirp.duration_s - t_margin) continue;
            CHECK(r.mag_db[i] == doctest::Approx(-3.0103).epsilon(0.02));
        }
        StimulusSpec louder = chirp;
        louder.level_db = 40.0;
        const auto trace2 = gen_stimulus(louder);
        AnalysisResult r2 = sliding_gaussian_response(trace2, louder, 2e-3, 60);
        for (std::size_t i = 0; i < r.mag_db.size(); ++i)
            CHECK(std::abs(r2.mag_db[i] - r.mag_db[i]) < 0.1);
    }

    SUBCASE("degenerate tone case is flat at the tone frequency") {
        StimulusSpec tone;
        tone.kind = StimulusKind::tone;
        tone.freq_hz = 4000.0;
        tone.fs = 100e3;
        tone.duration_s = 0.05;
        tone.level_db = 20.0;
        const auto trace = gen_stimulus(tone);
        const AnalysisResult r = sliding_gaussian_response(trace, tone, 2e-3);
        REQUIRE(r.freqs.size() == 1);
        CHECK(r.freqs[0] == 4000.0);
        CHECK(r.mag_db[0] == doctest::Approx(-3.0103).epsilon(0.02));
    }

    SUBCASE("window exceeding the trace is an error") {
        const std::vector<double> tiny(32, 0.0);
        CHECK_THROWS_AS(sliding_gaussian_response(tiny, chirp, 2e-3), ConfigError);
    }

    SUBCASE("re-max normalization") {
        const auto trace = gen_stimulus(chirp);
        AnalysisResult r = sliding_gaussian_response(trace, chirp, 2e-3, 40);
        normalize_re_max(r);
        double mx = -1e9;
        for (double m : r.mag_db) mx = std::max(mx, m);
        CHECK(mx == doctest::Approx(0.0));
        CHECK(r.norm_re_max);
    }
}

TEST_CASE("q10") {
    SUBCASE("symmetric triangular peak") {
        AnalysisResult r;
        const double fpk = 10000.0, w = 800.0;  // -10 dB half-width
        for (double f = 7000.0; f <= 13000.0; f += 50.0) {
            r.freqs.push_back(f);
            r.mag_db.push_back(-10.0 * std::abs(f - fpk) / w);
        }
        bool partial = true;
        const double q = q10(r, &partial);
        CHECK_FALSE(partial);
        CHECK(q == doctest::Approx(fpk / (2.0 * w)).epsilon(1e-6));

        SUBCASE("frequency-axis rescaling leaves q10 invariant") {
            AnalysisResult r2 = r;
            for (double& f : r2.freqs) f *= 3.0;
            CHECK(q10(r2) == doctest::Approx(q).epsilon(1e-9));
        }
    }
    SUBCASE("missing flank flags a partial result") {
        AnalysisResult r;
        for (double f = 9000.0; f <= 11000.0; f += 100.0) {
            r.freqs.push_back(f);
            r.mag_db.push_back(-5.0 * std::abs(f - 10000.0) / 1000.0);  // only -5 dB span
        }
        bool partial = false;
        CHECK(q10(r, &partial) < 0.0);
        CHECK(partial);
    }
}
