#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "sono/types.hpp"

namespace sono {

// On-disk format: <name>.f32 holds raw little-endian float32 samples (complex
// waveforms interleave re, im) and <name>.json is the sidecar:
//   {"fs_hz": ..., "kind": "passband_real" | "baseband_complex",
//    "first_symbol_index": int | null, "config_digest": "..."}
// plus any extra keys the writer wants to record. Writes are atomic
// (temp file + rename).

struct LoadedWaveform {
  Waveform wave;
  nlohmann::json sidecar;
};

void save_waveform_pair(const std::filesystem::path& f32_path, const Waveform& w,
                        const std::string& config_digest_hex,
                        const nlohmann::json& extra = nlohmann::json::object());

LoadedWaveform load_waveform_pair(const std::filesystem::path& f32_path);

// Atomic text write used for every report/table file the tools emit.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sono
