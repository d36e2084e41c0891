#pragma once

#include <vector>

#include "cochlea/stimulus.hpp"

namespace cochlea {

struct AnalysisResult {
    std::vector<double> freqs;    // Hz
    std::vector<double> mag_db;   // normalized per the flags below
    std::vector<double> phase;    // rad
    bool norm_re_level = true;    // magnitudes referenced to the sound level
    bool norm_re_max = false;
    double level_db = 0.0;
    bool sweep_warning = false;   // sweep too fast for the window bandwidth
};

// Chirp-derived frequency response: at each frequency, the RMS of the trace
// under a Gaussian window centered where the instantaneous chirp frequency
// matches. Throws ConfigError when the window does not fit in the trace.
AnalysisResult sliding_gaussian_response(const std::vector<double>& v_trace,
                                         const StimulusSpec& chirp,
                                         double window_sigma_s, int n_freqs = 200);

// Rescale magnitudes to the set's maximum (sets norm_re_max).
void normalize_re_max(AnalysisResult& r);

// f_peak / (f_hi - f_lo) at the -10 dB flanks, flanks linearly interpolated.
// Returns a negative value and sets *partial when a flank is out of band.
double q10(const AnalysisResult& r, bool* partial = nullptr);

// Steady-state RMS over the last half of a trace.
double steady_rms(const std::vector<double>& v);

// Zero-crossing times (linear interpolation) of a trace sampled at fs,
// starting from the first sample after t_from.
std::vector<double> zero_crossings(const std::vector<double>& v, double fs,
                                   double t_from = 0.0, int max_count = 0);

}  // namespace cochlea
