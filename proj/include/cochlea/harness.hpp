#pragma once

#include <vector>

#include "cochlea/analysis.hpp"
#include "cochlea/tl_model.hpp"

namespace cochlea {

struct GrowthPoint {
    double level_db = 0.0;
    double v_rms = 0.0;
    double v_db = 0.0;  // 20 log10(v_rms / 1 m/s)
};

struct GrowthResult {
    std::vector<GrowthPoint> points;
    std::vector<double> slopes;        // dB/dB between consecutive levels
    double slope_low = 0.0;            // first interval
    double slope_mid = 0.0;            // median slope inside the compressive span
    double span_lo_db = 0.0;           // compressive span boundaries (levels)
    double span_hi_db = 0.0;
    double span_db = 0.0;              // span_hi - span_lo, 0 if none
    double compression_depth_db = 0.0; // unit-slope extrapolation minus actual at top
};

// Steady-state CF-tone growth function at the place with the given CF.
GrowthResult growth_function(const ModelParams& p, const TLConfig& cfg, Mode mode,
                             const FilterLUT* lut, double cf_hz,
                             const std::vector<double>& levels_db,
                             double tone_s = 0.025);

}  // namespace cochlea
