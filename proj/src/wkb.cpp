#include "cochlea/wkb.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "cochlea/errors.hpp"

namespace cochlea {

std::vector<double> regression_grid(const ModelParams& p) {
    std::vector<double> f(p.m2);
    const double df = p.fs / (2.0 * p.m2);
    for (int m = 0; m < p.m2; ++m) f[m] = m * df;
    return f;
}

cplx pressure_focusing(cplx kh) {
    const double mag = std::abs(kh);
    if (mag < 1e-3) {
        const cplx kh2 = kh * kh;
        return 1.0 + kh2 / 3.0 - kh2 * kh2 / 45.0;
    }
    // tanh -> +/-1 to machine precision; also avoids exp overflow in std::tanh
    if (kh.real() > 20.0) return kh;
    if (kh.real() < -20.0) return -kh;
    return kh / std::tanh(kh);
}

cplx ybm_s2d(double omega, double omega_bm, double G, cplx alpha, const ModelParams& p) {
    const double gamma_damp = (1.0 - G) * omega_bm;
    const double visc = 4.0 * p.b_visc * p.mu / (p.sigma_bm * p.H);
    const cplx den = -omega * omega +
                     cplx(0.0, omega) * (gamma_damp + visc * alpha) +
                     omega_bm * omega_bm;
    const double guard = std::numeric_limits<double>::epsilon() *
                         (omega * omega + omega_bm * omega_bm);
    if (std::abs(den) <= guard)
        throw NumericalError("ybm_s2d: singular denominator at resonance");
    return cplx(0.0, -omega) / p.sigma_bm / den;
}

namespace {

struct DispEq {
    // A*x*tanh(x) + j*w*visc*x^2 - C = 0 in x = kappa*H units.
    cplx A;
    double wvisc;  // omega * 4 b mu / (sigma H)
    double C;      // 2 H rho omega^2 / sigma

    cplx tanh_guarded(cplx x) const {
        if (x.real() > 20.0) return 1.0;
        if (x.real() < -20.0) return -1.0;
        return std::tanh(x);
    }
    cplx f(cplx x) const {
        const cplx t = tanh_guarded(x);
        return A * x * t + cplx(0.0, wvisc) * x * x - C;
    }
    cplx df(cplx x) const {
        const cplx t = tanh_guarded(x);
        return A * (t + x * (1.0 - t * t)) + cplx(0.0, 2.0 * wvisc) * x;
    }
    double residual(cplx x) const { return std::abs(f(x)) / C; }
    cplx long_wave_root() const {
        // alpha = 1: (A + j wvisc) x^2 = C
        cplx x = std::sqrt(C / (A + cplx(0.0, wvisc)));
        return (x.real() < 0.0) ? -x : x;
    }
    // Spec'd relaxed fixed point x <- (1-w)x + w*sqrt(C*alpha(x)/D(alpha(x))),
    // used when a Newton step degenerates.
    cplx relax_step(cplx x, double w) const {
        const cplx al = pressure_focusing(x);
        cplx xn = std::sqrt(C * al / (A + cplx(0.0, wvisc) * al));
        if (xn.real() < 0.0) xn = -xn;
        return (1.0 - w) * x + w * xn;
    }
};

// Damped Newton from x0; returns iterations used, x updated in place.
bool newton_solve(const DispEq& eq, cplx& x, double tol, int max_iter, int& iters) {
    for (int it = 0; it < max_iter; ++it) {
        ++iters;
        const cplx fx = eq.f(x);
        if (std::abs(fx) / eq.C <= tol) return true;
        const cplx d = eq.df(x);
        cplx xn;
        if (std::abs(d) < 1e-300) {
            xn = eq.relax_step(x, 0.5);
        } else {
            cplx step = fx / d;
            xn = x - step;
            // halve the step until the residual decreases
            int tries = 0;
            while (tries < 8 && (!std::isfinite(xn.real()) || !std::isfinite(xn.imag()) ||
                                 std::abs(eq.f(xn)) >= std::abs(fx))) {
                step *= 0.5;
                xn = x - step;
                ++tries;
            }
            if (tries == 8) xn = eq.relax_step(x, 0.5);
        }
        if (xn.real() < 0.0) xn = -xn;
        x = xn;
    }
    return eq.residual(x) <= tol;
}

DispEq make_eq(double omega, double omega_bm, double G, const ModelParams& p) {
    DispEq eq;
    eq.A = cplx(omega_bm * omega_bm - omega * omega, omega * (1.0 - G) * omega_bm);
    eq.wvisc = omega * 4.0 * p.b_visc * p.mu / (p.sigma_bm * p.H);
    eq.C = 2.0 * p.H * p.rho * omega * omega / p.sigma_bm;
    return eq;
}

}  // namespace

DispersionSolution solve_dispersion(double omega, double omega_bm, double G,
                                    const ModelParams& p, double tol, int max_iter,
                                    const cplx* warm) {
    if (omega <= 0.0) throw std::domain_error("solve_dispersion: omega must be > 0");
    if (tol <= 0.0) throw std::domain_error("solve_dispersion: tol must be > 0");

    int iters = 0;
    cplx x;
    bool ok = false;
    if (warm) {
        x = *warm * p.H;
        ok = newton_solve(make_eq(omega, omega_bm, G, p), x, tol, max_iter, iters);
    }
    if (!ok) {
        // continuation in omega from well below, starting at the long-wave root
        const int ladder = 12;
        x = make_eq(omega / ladder, omega_bm, G, p).long_wave_root();
        for (int s = 1; s <= ladder; ++s) {
            const double w = omega * s / ladder;
            const DispEq eq = make_eq(w, omega_bm, G, p);
            ok = newton_solve(eq, x, tol, max_iter, iters);
        }
    }
    const DispEq eq = make_eq(omega, omega_bm, G, p);
    const double res = eq.residual(x);
    if (!ok || res > tol)
        throw NonConvergenceError("solve_dispersion: no convergence", res);

    DispersionSolution sol;
    sol.kappa = x / p.H;
    sol.alpha = pressure_focusing(x);
    sol.iterations = iters;
    sol.residual = res;
    return sol;
}

ComplexSpectrum beta_target(double omega_bm, double G, const ModelParams& p) {
    if (G < p.G_min || G > p.G_max)
        throw std::domain_error("beta_target: G outside [G_min, G_max]");
    ComplexSpectrum out;
    out.freqs = regression_grid(p);
    out.values.resize(out.freqs.size());
    cplx warm_g, warm_ref;
    bool have_warm = false;
    for (std::size_t m = 0; m < out.freqs.size(); ++m) {
        if (out.freqs[m] == 0.0) {
            out.values[m] = 1.0;  // both alphas -> 1 in the long-wave limit
            continue;
        }
        const double w = 2.0 * M_PI * out.freqs[m];
        const DispersionSolution sg =
            solve_dispersion(w, omega_bm, G, p, 1e-8, 200, have_warm ? &warm_g : nullptr);
        const DispersionSolution sr =
            solve_dispersion(w, omega_bm, p.G_ref, p, 1e-8, 200, have_warm ? &warm_ref : nullptr);
        warm_g = sg.kappa;
        warm_ref = sr.kappa;
        have_warm = true;
        out.values[m] = sg.alpha / sr.alpha;
    }
    return out;
}

void write_beta_csv(const ComplexSpectrum& beta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out.precision(17);
    out << "f_hz,beta_re,beta_im\n";
    for (std::size_t i = 0; i < beta.freqs.size(); ++i)
        out << beta.freqs[i] << "," << beta.values[i].real() << ","
            << beta.values[i].imag() << "\n";
}

}  // namespace cochlea
