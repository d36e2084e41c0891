#pragma once

#include <vector>

namespace cochlea {

// Shunt-admittance parameter triplet (plus the achieved normalized ring
// frequency eta) for a prescribed double-pole distance xi from the imaginary
// axis. Normalized denominator: s^2 + delta*s + 1 - rho*exp(-psi*s).
struct PoleTriplet {
    double rho = 0.0;
    double delta = 0.0;
    double psi = 0.0;
    double eta = 1.0;
};

// Solves D(s*) = 0 at s* = -xi + j*eta for (delta, rho) with eta and psi
// held fixed: the constant-ring-frequency trajectory used between the knee
// points (zero-crossing times stay put while damping moves).
PoleTriplet pinned_triplet(double xi, double eta, double psi);

// Tabulated solutions of the tangency system D(s*) = D'(s*) = 0 at
// s* = -xi + j*eta, computed once by Newton continuation over xi.
// Frequency-independent: one table serves every section.
class PoleTable {
  public:
    PoleTable(double xi_min = 0.005, double xi_max = 0.7, int n = 280);

    PoleTriplet at(double xi) const;  // linear interpolation, xi clamped
    double xi_min() const { return xi_min_; }
    double xi_max() const { return xi_max_; }

  private:
    double xi_min_, xi_max_, dxi_;
    std::vector<PoleTriplet> rows_;
};

}  // namespace cochlea
