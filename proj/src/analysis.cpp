#include "cochlea/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "cochlea/errors.hpp"

namespace cochlea {

AnalysisResult sliding_gaussian_response(const std::vector<double>& v_trace,
                                         const StimulusSpec& chirp,
                                         double window_sigma_s, int n_freqs) {
    if (chirp.kind != StimulusKind::chirp && chirp.kind != StimulusKind::tone)
        throw ConfigError("sliding_gaussian_response: need a chirp (or tone) spec");
    if (window_sigma_s <= 0.0) throw ConfigError("window sigma must be positive");
    const double fs = chirp.fs;
    const int n = static_cast<int>(v_trace.size());
    const double T = n / fs;
    const int half = static_cast<int>(std::ceil(3.0 * window_sigma_s * fs));
    if (2 * half + 1 > n)
        throw ConfigError("sliding_gaussian_response: window exceeds the trace");

    const bool stationary = (chirp.kind == StimulusKind::tone);
    const double f0 = stationary ? chirp.freq_hz : chirp.f_start_hz;
    const double f1 = stationary ? chirp.freq_hz : chirp.f_end_hz;
    const double rate = stationary ? 0.0 : (f1 - f0) / chirp.duration_s;

    AnalysisResult r;
    r.level_db = chirp.level_db;
    // instantaneous bandwidth vs sweep: rate * sigma should stay below the
    // window bandwidth ~ 1/(2 pi sigma)
    if (!stationary &&
        std::abs(rate) * window_sigma_s > 1.0 / (2.0 * M_PI * window_sigma_s))
        r.sweep_warning = true;

    if (stationary) n_freqs = 1;
    r.freqs.resize(n_freqs);
    r.mag_db.resize(n_freqs);
    r.phase.resize(n_freqs);
    const double amp = std::pow(10.0, chirp.level_db / 20.0);
    for (int i = 0; i < n_freqs; ++i) {
        const double f =
            stationary ? f0 : f0 + (f1 - f0) * (i + 0.5) / n_freqs;
        const double tc = stationary ? T / 2.0 : (f - f0) / rate;
        int ic = static_cast<int>(std::llround(tc * fs));
        ic = std::clamp(ic, half, n - 1 - half);
        double wsum = 0.0, acc = 0.0;
        std::complex<double> dft = 0.0;
        for (int j = ic - half; j <= ic + half; ++j) {
            const double dtc = (j - ic) / fs;
            const double w = std::exp(-0.5 * dtc * dtc / (window_sigma_s * window_sigma_s));
            wsum += w;
            acc += w * v_trace[j] * v_trace[j];
            dft += w * v_trace[j] *
                   std::exp(std::complex<double>(0.0, -2.0 * M_PI * f * j / fs));
        }
        const double rms = std::sqrt(acc / wsum);
        r.freqs[i] = f;
        r.mag_db[i] = 20.0 * std::log10(std::max(rms, 1e-300)) -
                      20.0 * std::log10(amp);  // re: sound level
        r.phase[i] = std::arg(dft);
    }
    return r;
}

void normalize_re_max(AnalysisResult& r) {
    if (r.mag_db.empty()) return;
    const double mx = *std::max_element(r.mag_db.begin(), r.mag_db.end());
    for (double& m : r.mag_db) m -= mx;
    r.norm_re_max = true;
}

double q10(const AnalysisResult& r, bool* partial) {
    if (partial) *partial = false;
    if (r.freqs.size() < 3) {
        if (partial) *partial = true;
        return -1.0;
    }
    const auto it = std::max_element(r.mag_db.begin(), r.mag_db.end());
    const int pk = static_cast<int>(it - r.mag_db.begin());
    const double target = *it - 10.0;
    double f_lo = -1.0, f_hi = -1.0;
    for (int i = pk; i > 0; --i) {
        if (r.mag_db[i - 1] <= target) {
            const double u = (r.mag_db[i] - target) / (r.mag_db[i] - r.mag_db[i - 1]);
            f_lo = r.freqs[i] + u * (r.freqs[i - 1] - r.freqs[i]);
            break;
        }
    }
    for (int i = pk; i + 1 < static_cast<int>(r.freqs.size()); ++i) {
        if (r.mag_db[i + 1] <= target) {
            const double u = (r.mag_db[i] - target) / (r.mag_db[i] - r.mag_db[i + 1]);
            f_hi = r.freqs[i] + u * (r.freqs[i + 1] - r.freqs[i]);
            break;
        }
    }
    if (f_lo < 0.0 || f_hi < 0.0) {
        if (partial) *partial = true;
        return -1.0;
    }
    return r.freqs[pk] / (f_hi - f_lo);
}

double steady_rms(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = n / 2; i < n; ++i, ++cnt) acc += v[i] * v[i];
    return std::sqrt(acc / cnt);
}

std::vector<double> zero_crossings(const std::vector<double>& v, double fs,
                                   double t_from, int max_count) {
    std::vector<double> out;
    const int i0 = std::max(1, static_cast<int>(t_from * fs));
    for (int i = i0; i < static_cast<int>(v.size()); ++i) {
        if ((v[i - 1] < 0.0 && v[i] >= 0.0) || (v[i - 1] > 0.0 && v[i] <= 0.0)) {
            const double u = v[i - 1] / (v[i - 1] - v[i]);
            out.push_back((i - 1 + u) / fs);
            if (max_count > 0 && static_cast<int>(out.size()) >= max_count) break;
        }
    }
    return out;
}

}  // namespace cochlea
