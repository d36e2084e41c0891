#include "cochlea/pole_table.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "cochlea/errors.hpp"

namespace cochlea {

namespace {

using cplx = std::complex<double>;

// Residual of the tangency system for x = (delta, rho, psi, eta) at given xi:
//   D(s)  = s^2 + delta*s + 1 - rho*e^{-psi s} = 0
//   D'(s) = 2s + delta + rho*psi*e^{-psi s}    = 0,  s = -xi + j*eta.
void tangency(const Eigen::Vector4d& x, double xi, Eigen::Vector4d& F,
              Eigen::Matrix4d& J) {
    const double delta = x(0), rho = x(1), psi = x(2), eta = x(3);
    const cplx s(-xi, eta);
    const cplx E = std::exp(-psi * s);
    const cplx D = s * s + delta * s + 1.0 - rho * E;
    const cplx Dp = 2.0 * s + delta + rho * psi * E;
    F << D.real(), D.imag(), Dp.real(), Dp.imag();

    const cplx j(0.0, 1.0);
    const cplx dD[4] = {s, -E, rho * s * E, (2.0 * s + delta + rho * psi * E) * j};
    const cplx dDp[4] = {1.0, psi * E, rho * E - rho * psi * s * E,
                         (2.0 - rho * psi * psi * E) * j};
    for (int c = 0; c < 4; ++c) {
        J(0, c) = dD[c].real();
        J(1, c) = dD[c].imag();
        J(2, c) = dDp[c].real();
        J(3, c) = dDp[c].imag();
    }
}

bool newton(Eigen::Vector4d& x, double xi) {
    Eigen::Vector4d F;
    Eigen::Matrix4d J;
    for (int it = 0; it < 120; ++it) {
        tangency(x, xi, F, J);
        const double n0 = F.norm();
        if (n0 < 1e-13) return true;
        const Eigen::Vector4d dx = J.partialPivLu().solve(F);
        double lam = 1.0;
        Eigen::Vector4d xn;
        for (int t = 0; t < 30; ++t) {
            xn = x - lam * dx;
            Eigen::Vector4d Fn;
            Eigen::Matrix4d Jn;
            tangency(xn, xi, Fn, Jn);
            if (Fn.norm() < n0) break;
            lam *= 0.5;
        }
        x = x - lam * dx;
    }
    tangency(x, xi, F, J);
    return F.norm() < 1e-10;
}

}  // namespace

PoleTriplet pinned_triplet(double xi, double eta, double psi) {
    // D(s) = s^2 + delta*s + 1 - rho*e^{-psi s} = 0; linear in (delta, rho)
    const cplx s(-xi, eta);
    const cplx E = std::exp(-psi * s);
    const cplx c = -(s * s + 1.0);
    // [Re s, -Re E; Im s, -Im E] (delta, rho)^T = (Re c, Im c)^T
    const double det = s.real() * (-E.imag()) - (-E.real()) * s.imag();
    if (std::abs(det) < 1e-12)
        throw NumericalError("pinned_triplet: degenerate system");
    PoleTriplet t;
    t.delta = (c.real() * (-E.imag()) - (-E.real()) * c.imag()) / det;
    t.rho = (s.real() * c.imag() - c.real() * s.imag()) / det;
    t.psi = psi;
    t.eta = eta;
    return t;
}

PoleTable::PoleTable(double xi_min, double xi_max, int n)
    : xi_min_(xi_min), xi_max_(xi_max) {
    if (n < 2 || xi_min <= 0.0 || xi_max <= xi_min)
        throw ConfigError("PoleTable: bad range");
    dxi_ = (xi_max - xi_min) / (n - 1);
    rows_.resize(n);

    // Anchor on the classic delayed-stiffness solution near xi = 0.06
    // (feedback delay about 1.74 ring periods), then continue outward.
    Eigen::Vector4d seed(-0.12, -0.14, 2.0 * M_PI * 1.74, 1.05);
    if (!newton(seed, 0.06))
        throw NumericalError("PoleTable: seed solve failed");

    auto continue_to = [&](Eigen::Vector4d x, double from, double to) {
        const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(to - from) / 0.01)));
        for (int i = 1; i <= steps; ++i) {
            const double xi = from + (to - from) * i / steps;
            if (!newton(x, xi))
                throw NumericalError("PoleTable: continuation failed at xi=" +
                                     std::to_string(xi));
        }
        return x;
    };

    // Fill the grid walking down then up from the anchor.
    Eigen::Vector4d x = continue_to(seed, 0.06, xi_min_);
    int i_lo = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = xi_min_ + i * dxi_;
        if (xi > 0.06) {
            i_lo = i;
            break;
        }
        if (!newton(x, xi))
            throw NumericalError("PoleTable: solve failed at xi=" + std::to_string(xi));
        rows_[i] = {x(1), x(0), x(2), x(3)};
        i_lo = i + 1;
    }
    x = seed;
    double prev = 0.06;
    for (int i = i_lo; i < n; ++i) {
        const double xi = xi_min_ + i * dxi_;
        x = continue_to(x, prev, xi);
        prev = xi;
        rows_[i] = {x(1), x(0), x(2), x(3)};
    }
}

PoleTriplet PoleTable::at(double xi) const {
    if (xi <= xi_min_) return rows_.front();
    if (xi >= xi_max_) return rows_.back();
    const double pos = (xi - xi_min_) / dxi_;
    const int i = std::min(static_cast<int>(pos), static_cast<int>(rows_.size()) - 2);
    const double u = pos - i;
    const PoleTriplet& a = rows_[i];
    const PoleTriplet& b = rows_[i + 1];
    return {a.rho + u * (b.rho - a.rho), a.delta + u * (b.delta - a.delta),
            a.psi + u * (b.psi - a.psi), a.eta + u * (b.eta - a.eta)};
}

}  // namespace cochlea
