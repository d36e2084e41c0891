#pragma once

#include <complex>
#include <vector>

#include "cochlea/params.hpp"

namespace cochlea {

// A frequency grid (Hz, strictly ascending) with one complex sample per point.
struct ComplexSpectrum {
    std::vector<double> freqs;
    std::vector<std::complex<double>> values;
};

// Canonical regression grid: m*fs/(2*m2) for m = 0..m2-1.
std::vector<double> regression_grid(const ModelParams& p);

}  // namespace cochlea
