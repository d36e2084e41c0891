#pragma once

#include <vector>

namespace cochlea {

enum class StimulusKind { tone, chirp, click };

// Amplitude convention: a 0 dB stimulus has unit peak amplitude; the
// pressure calibration (stim_scale) is applied by the simulator.
struct StimulusSpec {
    StimulusKind kind = StimulusKind::tone;
    double level_db = 40.0;
    double freq_hz = 1000.0;       // tone
    double f_start_hz = 2000.0;    // chirp
    double f_end_hz = 10000.0;
    double click_onset_s = 0.5e-3;
    double click_width_s = 0.0;    // 0 -> single sample
    double ramp_s = 1e-3;          // raised-cosine on/off ramps (tone, chirp)
    double duration_s = 0.02;
    double fs = 200e3;
};

// Throws ConfigError on band violations (content must stay below fs/2) and
// on tone ramps shorter than 1 ms.
std::vector<double> gen_stimulus(const StimulusSpec& spec);

}  // namespace cochlea
