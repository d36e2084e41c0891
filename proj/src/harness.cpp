#include "cochlea/harness.hpp"

#include <algorithm>
#include <cmath>

#include "cochlea/errors.hpp"
#include "cochlea/stimulus.hpp"

namespace cochlea {

GrowthResult growth_function(const ModelParams& p, const TLConfig& cfg, Mode mode,
                             const FilterLUT* lut, double cf_hz,
                             const std::vector<double>& levels_db, double tone_s) {
    if (levels_db.size() < 2) throw ConfigError("growth_function: need >= 2 levels");
    GrowthResult r;
    r.points.resize(levels_db.size());

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(levels_db.size()); ++i) {
        try {
            StimulusSpec spec;
            spec.kind = StimulusKind::tone;
            spec.freq_hz = cf_hz;
            spec.level_db = levels_db[i];
            spec.duration_s = tone_s;
            spec.ramp_s = 0.002;
            spec.fs = p.fs;
            Simulator sim(p, cfg, mode, lut);
            RunOptions ro;
            ro.sections = {sim.section_of_cf(cf_hz)};
            ro.record_g = false;
            const Traces tr = sim.run(gen_stimulus(spec), ro);
            const double rms = steady_rms(tr.v[0]);
            r.points[i] = {levels_db[i], rms, 20.0 * std::log10(std::max(rms, 1e-300))};
        } catch (...) {
            // exceptions must not unwind through the parallel region
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const int ni = static_cast<int>(levels_db.size()) - 1;
    r.slopes.resize(ni);
    for (int i = 0; i < ni; ++i)
        r.slopes[i] = (r.points[i + 1].v_db - r.points[i].v_db) /
                      (r.points[i + 1].level_db - r.points[i].level_db);
    r.slope_low = r.slopes.front();

    // Compressive span: contiguous region with slope below the linear-to-
    // compressive midpoint, boundaries interpolated on the slope curve.
    const double thr = (1.0 + p.a) / 2.0;
    std::vector<double> mid(ni);
    for (int i = 0; i < ni; ++i)
        mid[i] = 0.5 * (r.points[i].level_db + r.points[i + 1].level_db);
    int first = -1, last = -1;
    for (int i = 0; i < ni; ++i) {
        if (r.slopes[i] < thr) {
            if (first < 0) first = i;
            last = i;
        }
    }
    if (first >= 0) {
        auto cross = [&](int a, int b) {  // slope crosses thr between a and b
            const double u = (r.slopes[a] - thr) / (r.slopes[a] - r.slopes[b]);
            return mid[a] + u * (mid[b] - mid[a]);
        };
        r.span_lo_db = (first > 0) ? cross(first - 1, first) : mid[first];
        r.span_hi_db = (last + 1 < ni) ? cross(last + 1, last) : mid[last];
        r.span_db = r.span_hi_db - r.span_lo_db;
        std::vector<double> inside(r.slopes.begin() + first, r.slopes.begin() + last + 1);
        std::sort(inside.begin(), inside.end());
        r.slope_mid = inside[inside.size() / 2];
    }
    r.compression_depth_db =
        (r.points.front().v_db +
         (r.points.back().level_db - r.points.front().level_db)) -
        r.points.back().v_db;
    return r;
}

}  // namespace cochlea
