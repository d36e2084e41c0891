#pragma once

#include <cstdint>
#include <string>

#include "cochlea/lut.hpp"
#include "cochlea/params.hpp"
#include "cochlea/stimulus.hpp"
#include "cochlea/tl_model.hpp"

namespace cochlea {

// Long-format CSV: t,section,v,y,G (G column only when recorded).
void save_traces_csv(const Traces& tr, const std::string& path);
Traces load_traces_csv(const std::string& path);

// Columnar binary: "BTRC", u32 version, u32 n_sections, u64 n_frames, f64 fs,
// u32 decim, u8 has_g, section ids (i32), then t, v, y[, G] columns (f64).
void save_traces_bin(const Traces& tr, const std::string& path);
Traces load_traces_bin(const std::string& path);

// Dispatch on extension (.csv / anything else -> binary).
void save_traces(const Traces& tr, const std::string& path, bool csv);
Traces load_traces(const std::string& path);

// Run manifest (JSON): config hash, LUT checksum, seed, stimulus summary.
void write_run_manifest(const std::string& path, const ModelParams& p,
                        const TLConfig& cfg, Mode mode, const FilterLUT* lut,
                        std::uint64_t seed, const StimulusSpec& spec);

}  // namespace cochlea
