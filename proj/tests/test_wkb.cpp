#include <cmath>
#include <complex>

#include "cochlea/errors.hpp"
#include "cochlea/wkb.hpp"
#include "doctest.h"

using namespace cochlea;

TEST_CASE("pressure focusing limits") {
    // long-wave: alpha -> 1
    for (double m : {1e-6, 1e-4, 9e-4}) {
        for (double ph = 0.0; ph < 6.2; ph += 0.7) {
            const cplx kh = std::polar(m, ph);
            CHECK(std::abs(pressure_focusing(kh) - 1.0) < 1e-6);
        }
    }
    // short-wave: alpha -> kh (tanh -> 1)
    for (double x : {10.5, 30.0, 200.0, 5000.0}) {
        CHECK(std::abs(pressure_focusing(cplx(x, 0.0)) / x - 1.0) < 1e-3);
    }
    // mid-range agrees with the direct formula
    const cplx kh(1.3, -0.4);
    CHECK(std::abs(pressure_focusing(kh) - kh / std::tanh(kh)) < 1e-14);
}

TEST_CASE("BM admittance") {
    const ModelParams p;
    const double wbm = 2.0 * M_PI * 25500.0;

    SUBCASE("zero frequency gives zero admittance") {
        CHECK(std::abs(ybm_s2d(0.0, wbm, 0.0, 1.0, p)) == 0.0);
    }
    SUBCASE("undamped resonance is singular") {
        ModelParams q = p;
        q.mu = 1e-300;  // no viscosity
        CHECK_THROWS_AS(ybm_s2d(wbm, wbm, 1.0, 1.0, q), NumericalError);
    }
    SUBCASE("finite at resonance with damping") {
        const cplx y = ybm_s2d(wbm, wbm, 0.0, 1.0, p);
        CHECK(std::isfinite(y.real()));
        CHECK(std::isfinite(y.imag()));
        CHECK(std::abs(y) > 0.0);
        // at resonance with Gamma = wbm: Y = -j w/sigma / (j w (wbm + visc))
        const double visc = 4.0 * p.b_visc * p.mu / (p.sigma_bm * p.H);
        const cplx expect = -1.0 / (p.sigma_bm * (wbm + visc));
        CHECK(std::abs(y - expect) / std::abs(expect) < 1e-12);
    }
}

TEST_CASE("dispersion solve") {
    const ModelParams p;
    const double wbm = 2.0 * M_PI * 25500.0;

    SUBCASE("long-wave regime matches the closed-form root") {
        const double w = 2.0 * M_PI * 100.0;
        const DispersionSolution s = solve_dispersion(w, wbm, 0.0, p);
        CHECK(std::abs(s.kappa * p.H) < 0.05);
        // closed-form 1-D root with alpha = 1
        const cplx y = ybm_s2d(w, wbm, 0.0, 1.0, p);
        cplx k_lw = std::sqrt(2.0 * cplx(0.0, 1.0) * p.rho * w * y / p.H);
        if (k_lw.real() < 0.0) k_lw = -k_lw;
        CHECK(std::abs(s.kappa - k_lw) / std::abs(k_lw) < 1e-3);
        CHECK(std::abs(s.alpha - 1.0) < 1e-3);
    }

    SUBCASE("residual and self-consistency on converged solves") {
        for (double f : {1000.0, 10000.0, 24000.0, 30000.0, 45000.0}) {
            const DispersionSolution s = solve_dispersion(2.0 * M_PI * f, wbm, 1.3, p);
            CHECK(s.residual <= 1e-8);
            CHECK(s.kappa.real() > 0.0);  // forward branch
            // alpha invariant: the focusing factor of the returned root
            // (kappa is stored as x/H, so allow round-off in kappa*H)
            CHECK(std::abs(s.alpha - pressure_focusing(s.kappa * p.H)) <
                  1e-12 * std::abs(s.alpha));
        }
    }

    SUBCASE("argument checks") {
        CHECK_THROWS_AS(solve_dispersion(0.0, wbm, 0.0, p), std::domain_error);
        CHECK_THROWS_AS(solve_dispersion(1.0, wbm, 0.0, p, -1.0), std::domain_error);
    }
}

TEST_CASE("beta targets") {
    const ModelParams p;
    const double wbm = 2.0 * M_PI * 25500.0;

    SUBCASE("reference strength gives the unit spectrum") {
        const ComplexSpectrum b = beta_target(wbm, p.G_ref, p);
        REQUIRE(static_cast<int>(b.values.size()) == p.m2);
        for (const auto& v : b.values) CHECK(std::abs(v - 1.0) < 1e-12);
    }

    SUBCASE("low-frequency limit is 1 and extremes stay in the documented band") {
        for (double G : {p.G_min, p.G_max}) {
            const ComplexSpectrum b = beta_target(wbm, G, p);
            CHECK(std::abs(b.values[0] - 1.0) == 0.0);
            CHECK(std::abs(b.values[1] - 1.0) < 1e-3);
            double mx = 0.0;
            for (const auto& v : b.values) mx = std::max(mx, std::abs(v));
            CHECK(mx >= 0.5);
            CHECK(mx <= 2.0);
        }
    }

    SUBCASE("G out of range is rejected") {
        CHECK_THROWS_AS(beta_target(wbm, p.G_max + 0.1, p), std::domain_error);
    }

    SUBCASE("raising G reduces damping and raises |Y| near resonance") {
        const double w = wbm;
        const cplx y0 = ybm_s2d(w, wbm, 0.0, 1.0, p);
        const cplx y1 = ybm_s2d(w, wbm, 1.0, 1.0, p);
        CHECK(std::abs(y1) > std::abs(y0));
    }
}
