#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cochlea/filter_design.hpp"
#include "cochlea/params.hpp"
#include "cochlea/rbf.hpp"

namespace cochlea {

// Precomputed filter coefficients over (section, G step). Entries are stored
// n-major: entry(n, g) = records[n*n_g + g].
struct FilterLUT {
    std::uint32_t version = 1;
    std::uint32_t n_sections = 0;
    std::uint32_t n_g = 0;
    std::uint32_t K = 0;
    double G_min = 0.0, G_max = 1.3;
    std::vector<double> b;         // n_sections * n_g * K
    std::vector<double> eps;       // n_sections * n_g
    std::vector<double> omega_bm;  // per section; in-memory only, not serialized

    const double* entry_b(int n, int g) const { return &b[(std::size_t(n) * n_g + g) * K]; }
    double entry_eps(int n, int g) const { return eps[std::size_t(n) * n_g + g]; }
    double g_value(int g) const {
        return n_g > 1 ? G_min + g * (G_max - G_min) / (n_g - 1) : G_min;
    }
};

// Materializes the trained net over all sections x 30 G steps, DC-enforces
// every entry and verifies stability. Throws NumericalError listing (n, g)
// pairs if any entry is unstable.
FilterLUT build_lut(const RbfNet& net, const ModelParams& p, int n_g = 30);

// Nearest-neighbor on the G grid (ties toward the lower index); G clamped.
int lut_g_index(const FilterLUT& lut, double G);
PoleFilter lut_query(const FilterLUT& lut, int n, double G);

// Binary format (little-endian): "BLUT", u32 version, u32 N, u32 n_g, u32 K,
// f64 G_min, f64 G_max, body of N*n_g records (K f64 b then f64 eps),
// trailing u32 CRC-32 of the body.
void save_lut(const FilterLUT& lut, const std::string& path);
FilterLUT load_lut(const std::string& path, const ModelParams* p = nullptr);

std::uint32_t lut_body_crc(const FilterLUT& lut);

}  // namespace cochlea
