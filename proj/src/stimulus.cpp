#include "cochlea/stimulus.hpp"

#include <cmath>

#include "cochlea/errors.hpp"

namespace cochlea {

namespace {

double onset_gain(double t, double ramp) {
    if (ramp <= 0.0 || t >= ramp) return 1.0;
    return 0.5 * (1.0 - std::cos(M_PI * t / ramp));
}

double ramp_gain(double t, double total, double ramp) {
    if (ramp <= 0.0) return 1.0;
    if (t < ramp) return 0.5 * (1.0 - std::cos(M_PI * t / ramp));
    if (t > total - ramp) return 0.5 * (1.0 - std::cos(M_PI * (total - t) / ramp));
    return 1.0;
}

}  // namespace

std::vector<double> gen_stimulus(const StimulusSpec& spec) {
    if (spec.fs <= 0.0 || spec.duration_s <= 0.0)
        throw ConfigError("gen_stimulus: fs and duration must be positive");
    const double amp = std::pow(10.0, spec.level_db / 20.0);
    const int n = static_cast<int>(std::llround(spec.duration_s * spec.fs));
    std::vector<double> s(n, 0.0);
    const double dt = 1.0 / spec.fs;

    switch (spec.kind) {
        case StimulusKind::tone: {
            if (spec.freq_hz <= 0.0 || spec.freq_hz >= spec.fs / 2.0)
                throw ConfigError("gen_stimulus: tone frequency outside (0, fs/2)");
            if (spec.ramp_s < 1e-3)
                throw ConfigError("gen_stimulus: tone ramps must be >= 1 ms");
            // onset ramp only: steady-state windows extend to the trace end
            for (int i = 0; i < n; ++i) {
                const double t = i * dt;
                s[i] = amp * onset_gain(t, spec.ramp_s) *
                       std::sin(2.0 * M_PI * spec.freq_hz * t);
            }
            break;
        }
        case StimulusKind::chirp: {
            if (spec.f_start_hz <= 0.0 || spec.f_end_hz <= 0.0 ||
                spec.f_start_hz >= spec.fs / 2.0 || spec.f_end_hz >= spec.fs / 2.0)
                throw ConfigError("gen_stimulus: chirp band outside (0, fs/2)");
            const double rate = (spec.f_end_hz - spec.f_start_hz) / spec.duration_s;
            for (int i = 0; i < n; ++i) {
                const double t = i * dt;
                const double phase =
                    2.0 * M_PI * (spec.f_start_hz * t + 0.5 * rate * t * t);
                s[i] = amp * ramp_gain(t, spec.duration_s, spec.ramp_s) * std::sin(phase);
            }
            break;
        }
        case StimulusKind::click: {
            const int start = static_cast<int>(std::llround(spec.click_onset_s * spec.fs));
            const int width =
                std::max(1, static_cast<int>(std::llround(spec.click_width_s * spec.fs)));
            if (start >= n) throw ConfigError("gen_stimulus: click onset beyond duration");
            for (int i = start; i < std::min(n, start + width); ++i) s[i] = amp;
            break;
        }
    }
    return s;
}

}  // namespace cochlea
